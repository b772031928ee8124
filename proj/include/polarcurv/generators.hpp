#pragma once

// Mesh generators for the reference configurations.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "polarcurv/mesh.hpp"
#include "polarcurv/surfaces.hpp"

namespace polarcurv {

enum class GridPattern {
  Isotropic,    // triangles equilateral in the metric |H|
  Anisotropic,  // Euclidean equilateral lattice regardless of H
};

/// n x n lattice with nominal spacing (length units), centred on the origin.
struct GridSpec {
  int n = 9;
  double spacing = 0.1;
};

namespace detail {

/// Row-shifted triangular lattice. Rows with odd distance from `center_row` are
/// shifted by half a column. Vertex (r, c) has index r * cols + c.
inline std::vector<Triangle> lattice_triangles(int rows, int cols, int center_row) {
  std::vector<Triangle> tris;
  tris.reserve(2 * (rows - 1) * (cols - 1));
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r + 1 < rows; ++r) {
    bool shifted = ((r - center_row) % 2 + 2) % 2 == 1;
    for (int c = 0; c + 1 < cols; ++c) {
      int a = id(r, c), b = id(r, c + 1), u = id(r + 1, c), d = id(r + 1, c + 1);
      if (!shifted) {
        tris.push_back({a, b, u});
        tris.push_back({b, d, u});
      } else {
        tris.push_back({a, b, d});
        tris.push_back({a, d, u});
      }
    }
  }
  return tris;
}

inline double lattice_shift(int r, int center_row) { return ((r - center_row) % 2 + 2) % 2 == 1 ? 0.5 : 0.0; }

/// Linear map taking a Euclidean equilateral lattice to one that is equilateral in
/// the metric |H|, normalised so the stiffest direction keeps unit scale. Stretch
/// is capped at 10.
inline Mat2 metric_lattice_map(const Mat2& H) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (H + H.transpose()));
  Vec2 lam = es.eigenvalues().cwiseAbs();
  double lmax = lam.maxCoeff();
  if (!(lmax > 0.0)) return Mat2::Identity();
  Vec2 stretch;
  for (int i = 0; i < 2; ++i) stretch(i) = lam(i) > 0.0 ? std::min(10.0, std::sqrt(lmax / lam(i))) : 10.0;
  return es.eigenvectors() * stretch.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

/// Vertices at x3 = 1/2 p^T H p + offsets[j] over a centred triangular lattice.
/// `offsets` may be empty (all zero) or hold one value per vertex.
inline TriMesh gen_paraboloid_mesh(const Mat2& H, const GridSpec& grid, const std::vector<double>& offsets = {},
                                   GridPattern pattern = GridPattern::Isotropic) {
  if (grid.n < 2 || !(grid.spacing > 0.0) || !std::isfinite(grid.spacing))
    throw Error(ErrorCode::InvalidGrid, "grid needs n >= 2 and a positive spacing");
  const int n = grid.n;
  if (!offsets.empty() && static_cast<int>(offsets.size()) != n * n)
    throw Error(ErrorCode::InvalidGrid, "offset count does not match the vertex count");
  if (!H.allFinite() || std::abs(H(0, 1) - H(1, 0)) > 1e-12 * (1.0 + H.norm()))
    throw Error(ErrorCode::InvalidParams, "H must be finite and symmetric");
  Mat2 shape = pattern == GridPattern::Isotropic ? detail::metric_lattice_map(H) : Mat2::Identity();
  const int center = n / 2;
  const double dy = std::sqrt(3.0) / 2.0;
  std::vector<Vec3> pos;
  pos.reserve(n * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      Vec2 u((c - center + detail::lattice_shift(r, center)) * grid.spacing, (r - center) * dy * grid.spacing);
      Vec2 p = shape * u;
      double z = 0.5 * p.dot(H * p);
      if (!offsets.empty()) z += offsets[r * n + c];
      pos.emplace_back(p.x(), p.y(), z);
    }
  }
  return build_mesh(std::move(pos), detail::lattice_triangles(n, n, center));
}

/// Regular octahedron subdivided `level` times by edge midpoints, projected to |x| = 1.
inline TriMesh gen_sphere_mesh(int level) {
  if (level < 0) throw Error(ErrorCode::InvalidParams, "level must be >= 0");
  std::vector<Vec3> pos = {Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};
  std::vector<Triangle> tris;
  for (int sx : {1, -1})
    for (int sy : {1, -1})
      for (int sz : {1, -1}) {
        int x = sx > 0 ? 0 : 1, y = sy > 0 ? 2 : 3, z = sz > 0 ? 4 : 5;
        if (sx * sy * sz > 0) tris.push_back({x, y, z});
        else tris.push_back({x, z, y});
      }
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      pos.push_back((pos[a] + pos[b]).normalized());
      int id = static_cast<int>(pos.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<Triangle> next;
    next.reserve(4 * tris.size());
    for (const auto& t : tris) {
      int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }
  return build_mesh(std::move(pos), std::move(tris));
}

inline void check_lantern_params(double R, double Hgt, int n, int m) {
  if (n < 3 || m < 1 || !(R > 0.0) || !(Hgt > 0.0) || !std::isfinite(R) || !std::isfinite(Hgt))
    throw Error(ErrorCode::InvalidParams, "lantern needs n >= 3, m >= 1, R > 0, Hgt > 0");
}

/// Schwarz lantern: m+1 rings of n points on the cylinder of radius R, height Hgt;
/// odd rings rotated by pi/n. Vertex (ring k, j) has index k * n + j.
inline TriMesh gen_schwarz_lantern(double R, double Hgt, int n, int m) {
  check_lantern_params(R, Hgt, n, m);
  const double step = 2.0 * std::numbers::pi / n;
  std::vector<Vec3> pos;
  pos.reserve(n * (m + 1));
  for (int k = 0; k <= m; ++k) {
    double shift = (k % 2) * 0.5;
    for (int j = 0; j < n; ++j) {
      double t = (j + shift) * step;
      pos.emplace_back(R * std::cos(t), R * std::sin(t), Hgt * k / m);
    }
  }
  auto id = [n](int k, int j) { return k * n + ((j % n) + n) % n; };
  std::vector<Triangle> tris;
  tris.reserve(2 * n * m);
  for (int k = 0; k < m; ++k) {
    int s = k % 2;
    for (int j = 0; j < n; ++j) {
      tris.push_back({id(k, j), id(k, j + 1), id(k + 1, j + s)});
      tris.push_back({id(k, j), id(k + 1, j + s), id(k + 1, j + s - 1)});
    }
  }
  return build_mesh(std::move(pos), std::move(tris));
}

/// 2 n m R sin(pi/n) sqrt((Hgt/m)^2 + 4 R^2 sin^4(pi/(2n))).
inline double lantern_area_closed_form(double R, double Hgt, int n, int m) {
  check_lantern_params(R, Hgt, n, m);
  const double pi = std::numbers::pi;
  double s = std::sin(pi / (2.0 * n));
  double dz = Hgt / m;
  return 2.0 * n * m * R * std::sin(pi / n) * std::sqrt(dz * dz + 4.0 * R * R * s * s * s * s);
}

/// Limit of the closed form along m = q n^2: 2 pi R sqrt(Hgt^2 + pi^4 R^2 q^2 / 4).
inline double lantern_area_limit(double R, double Hgt, double q) {
  const double pi = std::numbers::pi;
  return 2.0 * pi * R * std::sqrt(Hgt * Hgt + pi * pi * pi * pi * R * R * q * q / 4.0);
}

/// Cube [-1/2, 1/2]^3 with every face split into four triangles at its centroid.
/// Vertices 0..7 are the corners, 8..13 the face centroids.
inline TriMesh gen_cube_centroid() {
  std::vector<Vec3> pos;
  for (int i = 0; i < 8; ++i) pos.emplace_back((i & 1) - 0.5, ((i >> 1) & 1) - 0.5, ((i >> 2) & 1) - 0.5);
  std::vector<Triangle> tris;
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      Vec3 normal = Vec3::Zero();
      normal(axis) = side ? 1.0 : -1.0;
      Vec3 centroid = 0.5 * normal;
      pos.push_back(centroid);
      int cid = static_cast<int>(pos.size()) - 1;
      std::vector<int> corners;
      for (int i = 0; i < 8; ++i)
        if (((i >> axis) & 1) == side) corners.push_back(i);
      // Order the four corners counterclockwise about the outward normal.
      auto [u, v] = tangent_basis(normal);
      std::sort(corners.begin(), corners.end(), [&](int a, int b) {
        Vec3 da = pos[a] - centroid, db = pos[b] - centroid;
        return std::atan2(da.dot(v), da.dot(u)) < std::atan2(db.dot(v), db.dot(u));
      });
      for (int j = 0; j < 4; ++j) tris.push_back({cid, corners[j], corners[(j + 1) % 4]});
    }
  }
  return build_mesh(std::move(pos), std::move(tris));
}

struct Domain {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

/// Triangular lattice over the rectangle lifted to x3 = f(x1, x2). The planar
/// spacing shrinks until every lifted edge is at most h.
inline TriMesh gen_graph_mesh(const Graph& f, const Domain& dom, double h) {
  double w = dom.x1 - dom.x0, d = dom.y1 - dom.y0;
  if (!(w > 0.0) || !(d > 0.0) || !std::isfinite(w) || !std::isfinite(d))
    throw Error(ErrorCode::InvalidDomain, "domain rectangle must have positive extent");
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidDomain, "h must be positive");
  double s = h;
  for (int attempt = 0; attempt < 8; ++attempt) {
    int cols = std::max(2, static_cast<int>(std::ceil(w / s - 0.5)) + 1);
    int rows = std::max(2, static_cast<int>(std::ceil(d / (s * std::sqrt(3.0) / 2.0))) + 1);
    if (static_cast<double>(rows) * cols > 4e6) throw Error(ErrorCode::InvalidDomain, "grid too large");
    double sx = w / (cols - 0.5);
    double sy = d / (rows - 1);
    std::vector<Vec3> pos;
    pos.reserve(rows * cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        double x = dom.x0 + (c + detail::lattice_shift(r, 0)) * sx;
        double y = dom.y0 + r * sy;
        pos.emplace_back(x, y, f.value(x, y));
      }
    TriMesh mesh = build_mesh(std::move(pos), detail::lattice_triangles(rows, cols, 0));
    double longest = 0.0;
    for (int e = 0; e < mesh.num_edges(); ++e) longest = std::max(longest, mesh.edge_length(e));
    if (longest <= h * (1.0 + 1e-12) || attempt == 7) return mesh;
    s *= h / longest * 0.999;
  }
  throw Error(ErrorCode::InvalidDomain, "unreachable");
}

/// Affine chart preserving x3 = 1/2 p^T H p that moves the lattice point `a` to the
/// apex: p' = p - a, x3' = x3 - u(a) - (H a).(p - a). Heights above the paraboloid
/// are unchanged.
inline Vec3 paraboloid_apex_chart(const Mat2& H, const Vec2& a, const Vec3& x) {
  Vec2 p(x.x(), x.y());
  Vec2 ha = H * a;
  return Vec3(p.x() - a.x(), p.y() - a.y(), x.z() - 0.5 * a.dot(ha) - ha.dot(p - a));
}

inline TriMesh paraboloid_apex_chart(const Mat2& H, const Vec2& a, const TriMesh& mesh) {
  std::vector<Vec3> pos;
  pos.reserve(mesh.num_vertices());
  for (const auto& x : mesh.positions()) pos.push_back(paraboloid_apex_chart(H, a, x));
  return build_mesh(std::move(pos), mesh.triangles());
}

/// Exact normals of a reference surface at every mesh vertex.
inline std::vector<Vec3> exact_normals(const ReferenceSurface& s, const TriMesh& mesh) {
  std::vector<Vec3> out;
  out.reserve(mesh.num_vertices());
  for (const auto& p : mesh.positions()) out.push_back(reference_normal(s, p));
  return out;
}

}  // namespace polarcurv
