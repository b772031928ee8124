#pragma once

// Curvature tensors from the piecewise-affine maps Q_i -> F_i (primal vertices) and
// G_k -> B_k (dual vertices), regularity classification, principal curvatures and
// the treatment of non-regular vertices.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "polarcurv/loops.hpp"
#include "polarcurv/polar_dual.hpp"

namespace polarcurv {

enum class Regularity { Regular, WeaklyRegular, NonRegular, Undefined };

enum class RegularityReason {
  None,
  SelfIntersectingQ,
  SelfIntersectingF,
  StarPointOutside,
  Boundary,
  SingularDual,
  SingularImage,
};

inline const char* to_string(Regularity r) {
  switch (r) {
    case Regularity::Regular: return "regular";
    case Regularity::WeaklyRegular: return "weakly-regular";
    case Regularity::NonRegular: return "non-regular";
    case Regularity::Undefined: return "undefined";
  }
  return "?";
}

inline const char* to_string(RegularityReason r) {
  switch (r) {
    case RegularityReason::None: return "";
    case RegularityReason::SelfIntersectingQ: return "self-intersecting-q";
    case RegularityReason::SelfIntersectingF: return "self-intersecting-f";
    case RegularityReason::StarPointOutside: return "star-point-outside";
    case RegularityReason::Boundary: return "boundary";
    case RegularityReason::SingularDual: return "singular-dual";
    case RegularityReason::SingularImage: return "singular-image";
  }
  return "?";
}

struct RegularityClass {
  Regularity kind = Regularity::Undefined;
  RegularityReason reason = RegularityReason::None;
  bool usable() const { return kind == Regularity::Regular || kind == Regularity::WeaklyRegular; }
};

/// Regular: Q and F star-shaped about the frame origin. WeaklyRegular: both simple
/// and strictly containing it. Orientation may be either sign (a saddle reverses F).
inline RegularityClass classify_polygons(const Polygon2& q, const Polygon2& f) {
  if (q.size() < 3 || f.size() < 3) throw Error(ErrorCode::TooFewVertices, "polygon with fewer than 3 vertices");
  const Vec2 origin = Vec2::Zero();
  RegularityClass rc;
  if (is_star_shaped_about(q, origin) && is_star_shaped_about(f, origin)) {
    rc.kind = Regularity::Regular;
    return rc;
  }
  bool qs = is_simple(q), fs = is_simple(f);
  if (!qs || !fs) {
    rc.kind = Regularity::NonRegular;
    rc.reason = !qs ? RegularityReason::SelfIntersectingQ : RegularityReason::SelfIntersectingF;
    return rc;
  }
  double tq = kGeomRel * diameter(q), tf = kGeomRel * diameter(f);
  if (contains_strictly(q, origin, tq) && contains_strictly(f, origin, tf)) {
    rc.kind = Regularity::WeaklyRegular;
    return rc;
  }
  rc.kind = Regularity::NonRegular;
  rc.reason = RegularityReason::StarPointOutside;
  return rc;
}

inline RegularityClass classify_vertex(const DualFace& q, const NormalImagePolygon& f, const VertexFrame&) {
  return classify_polygons(q.q, f.f);
}

struct FanTriangulation {
  Vec2 star = Vec2::Zero();
  std::vector<std::array<int, 2>> triangles;  // (k, k+1) with the star point
  int orientation = 1;                        // common sign of all fan triangles
};

inline FanTriangulation triangulate_fan(const Polygon2& poly, const Vec2& star) {
  if (poly.size() < 3) throw Error(ErrorCode::TooFewVertices, "polygon with fewer than 3 vertices");
  if (!is_simple(poly)) throw Error(ErrorCode::NotSimple, "polygon is not simple");
  int orient = signed_area(poly) >= 0 ? 1 : -1;
  double diam = diameter(poly);
  double margin = kGeomRel * diam * diam;
  auto fan = fan_orientations(poly, star);
  FanTriangulation out;
  out.star = star;
  out.orientation = orient;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    if (orient * fan[k] <= margin)
      throw Error(ErrorCode::StarPointOutsideKernel, "fan triangle " + std::to_string(k) + " is not " +
                                                         (orient > 0 ? "positively" : "negatively") + " oriented");
    out.triangles.push_back({static_cast<int>(k), static_cast<int>((k + 1) % poly.size())});
  }
  return out;
}

struct PrincipalCurvatures {
  double k1 = 0.0, k2 = 0.0;  // |k1| >= |k2|
  Vec2 dir1 = Vec2::UnitX(), dir2 = Vec2::UnitY();
  bool ambiguous = false;  // sign assignment not determined by the trace
};

/// Singular values with signs fixed by det A and the trace of the symmetric part.
inline PrincipalCurvatures principal_curvatures(const Mat2& a) {
  if (!a.allFinite()) throw Error(ErrorCode::NonFinite, "tensor has non-finite entries");
  Eigen::JacobiSVD<Mat2> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec2 s = svd.singularValues();
  PrincipalCurvatures pc;
  pc.dir1 = svd.matrixV().col(0);
  pc.dir2 = svd.matrixV().col(1);
  double det = a.determinant();
  double tr = a.trace();
  double scale = s(0);
  pc.ambiguous = scale > 0.0 && std::abs(tr) <= 1e-12 * scale;
  double sgn = tr < 0 && !pc.ambiguous ? -1.0 : 1.0;
  if (std::abs(det) <= 1e-14 * scale * scale || det > 0) {
    pc.k1 = sgn * s(0);
    pc.k2 = sgn * s(1);
  } else {
    pc.k1 = sgn * s(0);
    pc.k2 = -sgn * s(1);
  }
  return pc;
}

struct CurvatureTensorSample {
  int anchor = -1;    // primal vertex (A*) or primal face (A_k)
  int triangle = -1;  // fan triangle index
  Mat2 A = Mat2::Zero();
  double area = 0.0;  // area of the source triangle
  std::array<Vec2, 3> source{};  // source triangle in frame coordinates
  PrincipalCurvatures principal;
};

struct VertexAnalysis {
  int vertex = -1;
  RegularityClass regularity;
  std::optional<DualFace> q;
  std::optional<NormalImagePolygon> f;
  Vec2 star_q = Vec2::Zero();
  Vec2 star_f = Vec2::Zero();
  bool ear_fallback = false;
  std::vector<CurvatureTensorSample> samples;
};

namespace detail {

inline std::optional<CurvatureTensorSample> affine_sample(int anchor, int tri, const Vec2& a, const Vec2& b,
                                                          const Vec2& c, const Vec2& a2, const Vec2& b2,
                                                          const Vec2& c2) {
  auto j = affine_jacobian(a, b, c, a2, b2, c2);
  if (!j) return std::nullopt;
  CurvatureTensorSample s;
  s.anchor = anchor;
  s.triangle = tri;
  s.A = -*j;
  s.area = 0.5 * std::abs(orient2(a, b, c));
  s.source = {a, b, c};
  s.principal = principal_curvatures(s.A);
  return s;
}

}  // namespace detail

/// Tensor samples for an already built Q_i / F_i pair.
inline VertexAnalysis analyze_vertex(const DualFace& q, const NormalImagePolygon& f) {
  VertexAnalysis va;
  va.vertex = q.center;
  va.q = q;
  va.f = f;
  va.regularity = classify_polygons(q.q, f.f);
  if (!va.regularity.usable()) return va;
  const Polygon2& Q = q.q;
  const Polygon2& F = f.f;
  const int n = static_cast<int>(Q.size());

  auto fan_samples = [&](const Vec2& sq, const Vec2& sf) {
    std::vector<CurvatureTensorSample> out;
    for (int m = 0; m < n; ++m) {
      auto s = detail::affine_sample(va.vertex, m, sq, Q[m], Q[(m + 1) % n], sf, F[m], F[(m + 1) % n]);
      if (!s) return std::vector<CurvatureTensorSample>{};
      out.push_back(*s);
    }
    return out;
  };

  if (va.regularity.kind == Regularity::Regular) {
    va.samples = fan_samples(Vec2::Zero(), Vec2::Zero());
    if (va.samples.empty()) throw Error(ErrorCode::DegenerateTriangle, "degenerate fan triangle in Q");
    return va;
  }
  // Weakly regular: kernel point of Q, mapped to F by the least-squares affine fit.
  if (auto kp = chebyshev_kernel_point(Q)) {
    if (auto fit = fit_affine(Q, F)) {
      Vec2 sf = fit->first * kp->point + fit->second;
      if (is_star_shaped_about(F, sf)) {
        va.star_q = kp->point;
        va.star_f = sf;
        va.samples = fan_samples(kp->point, sf);
        if (!va.samples.empty()) return va;
      }
    }
  }
  auto ears = ear_clip(Q);
  if (!ears) {
    va.regularity = RegularityClass{Regularity::NonRegular, RegularityReason::StarPointOutside};
    return va;
  }
  va.ear_fallback = true;
  for (std::size_t t = 0; t < ears->size(); ++t) {
    const auto& e = (*ears)[t];
    auto s = detail::affine_sample(va.vertex, static_cast<int>(t), Q[e[0]], Q[e[1]], Q[e[2]], F[e[0]], F[e[1]],
                                   F[e[2]]);
    if (!s) throw Error(ErrorCode::DegenerateTriangle, "degenerate ear triangle in Q");
    va.samples.push_back(*s);
  }
  return va;
}

/// Full analysis at vertex v; geometric failures are recorded as Undefined.
inline VertexAnalysis analyze_vertex(const TriMesh& mesh, const std::vector<Vec3>& normals, int v) {
  VertexAnalysis va;
  va.vertex = v;
  if (mesh.is_boundary_vertex(v) || mesh.is_isolated(v)) {
    va.regularity = RegularityClass{Regularity::Undefined, RegularityReason::Boundary};
    return va;
  }
  DualFace q;
  try {
    q = dual_face(mesh, normals, v);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularSystem) throw;
    va.regularity = RegularityClass{Regularity::Undefined, RegularityReason::SingularDual};
    return va;
  }
  NormalImagePolygon f;
  try {
    f = normal_image(mesh, v, normals[v]);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularSystem) throw;
    va.q = q;
    va.regularity = RegularityClass{Regularity::Undefined, RegularityReason::SingularImage};
    return va;
  }
  return analyze_vertex(q, f);
}

inline VertexAnalysis analyze_vertex(const DualSurface& dual, const TriMesh& mesh, int v) {
  const DualFaceRecord& rec = dual.faces[v];
  VertexAnalysis va;
  va.vertex = v;
  if (rec.status != DualStatus::Defined) {
    va.regularity = RegularityClass{Regularity::Undefined, rec.status == DualStatus::Boundary
                                                               ? RegularityReason::Boundary
                                                               : RegularityReason::SingularDual};
    return va;
  }
  if (!rec.image) {
    va.q = rec.face;
    va.regularity = RegularityClass{Regularity::Undefined, RegularityReason::SingularImage};
    return va;
  }
  (void)mesh;
  return analyze_vertex(rec.face, *rec.image);
}

inline std::vector<CurvatureTensorSample> curvature_at_vertex(const TriMesh& mesh, const std::vector<Vec3>& normals,
                                                              int v) {
  VertexAnalysis va = analyze_vertex(mesh, normals, v);
  if (!va.regularity.usable())
    throw Error(ErrorCode::NotRegularEnough, "vertex " + std::to_string(v) + " is " + to_string(va.regularity.kind));
  return va.samples;
}

struct DualVertexCurvature {
  int face = -1;
  bool defined = false;
  std::string reason;
  NormalImagePolygon b;
  std::array<Vec2, 3> g{};  // G_k corners in the face frame
  CurvatureTensorSample sample;
};

inline DualVertexCurvature analyze_dual_vertex(const DualSurface& dual, const TriMesh& mesh, int k) {
  DualVertexCurvature out;
  out.face = k;
  try {
    out.b = dual_vertex_normal_image(dual, mesh, k);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UndefinedNeighbor && e.code() != ErrorCode::SingularSystem) throw;
    out.reason = to_string(e.code());
    return out;
  }
  const Triangle& t = mesh.triangle(k);
  for (int j = 0; j < 3; ++j) out.g[j] = out.b.frame.to_local(mesh.position(t[j]));
  if (!is_simple(out.b.f)) {
    out.reason = "non-simple-b";
    return out;
  }
  auto s = detail::affine_sample(k, 0, out.g[0], out.g[1], out.g[2], out.b.f[0], out.b.f[1], out.b.f[2]);
  if (!s) {
    out.reason = "degenerate-face";
    return out;
  }
  out.sample = *s;
  out.defined = true;
  return out;
}

inline CurvatureTensorSample curvature_at_dual_vertex(const DualSurface& dual, const TriMesh& mesh, int k) {
  DualVertexCurvature d = analyze_dual_vertex(dual, mesh, k);
  if (!d.defined)
    throw Error(ErrorCode::NotRegularEnough, "dual vertex of face " + std::to_string(k) + ": " + d.reason);
  return d.sample;
}

/// 2 pi minus the incident corner angles.
inline double angle_defect(const TriMesh& mesh, int v) {
  check_vertex(mesh, v);
  if (mesh.is_boundary_vertex(v) || mesh.is_isolated(v))
    throw Error(ErrorCode::BoundaryVertex, "vertex " + std::to_string(v) + " lies on the boundary");
  double sum = 0.0;
  for (int f : vertex_star(mesh, v).faces) sum += corner_angle(mesh, f, v);
  return 2.0 * std::numbers::pi - sum;
}

namespace detail {

/// True when the origin lies in the closed convex hull of the unit directions
/// (Caratheodory: some subset of at most four points contains it).
inline bool origin_in_hull(const std::vector<Vec3>& d, double tol) {
  const int n = static_cast<int>(d.size());
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if ((d[a] + d[b]).norm() <= tol) return true;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c) {
        if (std::abs(d[a].dot(d[b].cross(d[c]))) > tol) continue;
        Eigen::Matrix<double, 3, 2> m;
        m.col(0) = d[a] - d[c];
        m.col(1) = d[b] - d[c];
        Vec2 l = m.colPivHouseholderQr().solve(-d[c]);
        if ((m * l + d[c]).norm() <= tol && l.x() >= -tol && l.y() >= -tol && l.sum() <= 1.0 + tol) return true;
      }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c)
        for (int e = c + 1; e < n; ++e) {
          Mat3 m;
          m.col(0) = d[a] - d[e];
          m.col(1) = d[b] - d[e];
          m.col(2) = d[c] - d[e];
          auto s = try_solve3(m, -d[e]);
          if (!s) continue;
          const Vec3& l = s->x;
          if (l.minCoeff() >= -tol && l.sum() <= 1.0 + tol) return true;
        }
  return false;
}

}  // namespace detail

/// All rim points strictly on one side of a plane through the vertex.
inline bool is_convex_type(const TriMesh& mesh, const VertexStar& star) {
  std::vector<Vec3> dirs;
  const Vec3& p = mesh.position(star.center);
  for (int r : star.rim) dirs.push_back((mesh.position(r) - p).normalized());
  return !detail::origin_in_hull(dirs, 1e-12);
}

namespace detail {

/// Normal image of the convex envelope of the vertex cone, in the frame of `f`.
/// `dropped` receives the rim positions that are not extreme rays of the envelope.
inline std::optional<Polygon2> convex_envelope_image(const TriMesh& mesh, const VertexStar& star,
                                                     const VertexFrame& frame, std::vector<int>& dropped) {
  const Vec3& p = mesh.position(star.center);
  std::vector<Vec3> dirs;
  for (int r : star.rim) dirs.push_back((mesh.position(r) - p).normalized());
  Vec3 axis = -frame.normal;
  bool inside = std::all_of(dirs.begin(), dirs.end(), [&](const Vec3& d) { return axis.dot(d) > 1e-9; });
  if (!inside) {
    axis = Vec3::Zero();
    for (const auto& d : dirs) axis += d;
    if (!(axis.norm() > 1e-12)) return std::nullopt;
    axis.normalize();
    inside = std::all_of(dirs.begin(), dirs.end(), [&](const Vec3& d) { return axis.dot(d) > 1e-9; });
    if (!inside) return std::nullopt;
  }
  auto [u, w] = tangent_basis(axis);
  Polygon2 proj;
  for (const auto& d : dirs) proj.emplace_back(u.dot(d) / axis.dot(d), w.dot(d) / axis.dot(d));
  Polygon2 hull = convex_hull(proj);
  if (hull.size() < 3) return std::nullopt;
  std::vector<int> ext;
  for (const auto& h : hull) {
    int best = 0;
    for (std::size_t j = 1; j < proj.size(); ++j)
      if ((proj[j] - h).squaredNorm() < (proj[best] - h).squaredNorm()) best = static_cast<int>(j);
    ext.push_back(best);
  }
  for (int j = 0; j < static_cast<int>(dirs.size()); ++j)
    if (std::find(ext.begin(), ext.end(), j) == ext.end()) dropped.push_back(j);
  Polygon2 out;
  for (std::size_t j = 0; j < ext.size(); ++j) {
    Vec3 n = dirs[ext[j]].cross(dirs[ext[(j + 1) % ext.size()]]);
    double s = frame.normal.dot(n);
    if (!(std::abs(s) > 1e-12 * n.norm())) return std::nullopt;
    Vec3 x = n / s;
    out.emplace_back(frame.e1.dot(x), frame.e2.dot(x));
  }
  return out;
}

}  // namespace detail

struct PrincipalComponent {
  Polygon2 polygon;
  std::vector<int> removed;  // saddle: indices into F in removal order; convex: rim positions off the envelope
  double defect = 0.0;
  bool convex_type = false;
  bool changed = false;
  LoopDecomposition loops;
};

inline PrincipalComponent principal_component(const TriMesh& mesh, const VertexStar& star,
                                              const NormalImagePolygon& f) {
  PrincipalComponent pc;
  double tol = kLoopRel * std::max(diameter(f.f), 1e-300);
  Polygon2 poly = dedupe_consecutive(f.f, tol);
  if (poly.size() < 3) {
    pc.polygon = poly;
    return pc;
  }
  pc.loops = decompose_normal_image(poly);
  if (is_simple(poly)) {
    pc.polygon = poly;
    return pc;
  }
  pc.changed = true;
  pc.convex_type = is_convex_type(mesh, star);
  if (pc.convex_type) {
    if (auto env = detail::convex_envelope_image(mesh, star, f.frame, pc.removed); env && is_simple(*env))
      pc.polygon = *env;
    else {
      pc.removed.clear();
      pc.polygon = convex_hull(poly);
    }
  } else {
    std::vector<int> ids(poly.size());
    std::iota(ids.begin(), ids.end(), 0);
    Polygon2 cur = poly;
    while (!is_simple(cur)) {
      if (cur.size() <= 3) throw Error(ErrorCode::Unclassifiable, "saddle filtering did not reach a simple polygon");
      int best = -1, best_count = 0;
      for (std::size_t r = 0; r < cur.size(); ++r) {
        Polygon2 trial = cur;
        trial.erase(trial.begin() + r);
        int c = count_self_intersections(trial, tol);
        if (best < 0 || c < best_count) {
          best = static_cast<int>(r);
          best_count = c;
        }
      }
      pc.removed.push_back(ids[best]);
      ids.erase(ids.begin() + best);
      cur.erase(cur.begin() + best);
    }
    pc.polygon = cur;
  }
  if (pc.polygon.size() < 3 || !is_simple(pc.polygon))
    throw Error(ErrorCode::Unclassifiable, "principal component is not a simple polygon");
  pc.defect = std::max(0.0, pc.loops.absolute_sum - std::abs(signed_area(pc.polygon)));
  return pc;
}

}  // namespace polarcurv
