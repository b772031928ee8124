#pragma once

// Overlap cells between dual faces and projected primal faces, the piecewise-affine
// map psi from the dual surface to the primal one, and the deviation between the
// primal-vertex and dual-vertex tensor families.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "polarcurv/curvature.hpp"

namespace polarcurv {

/// Everything the tensor-level modules need: the dual surface and both tensor families.
struct CurvatureField {
  DualSurface dual;
  std::vector<VertexAnalysis> vertices;
  std::vector<DualVertexCurvature> faces;
};

inline CurvatureField compute_curvature_field(const TriMesh& mesh, const std::vector<Vec3>& normals) {
  CurvatureField cf;
  cf.dual = build_dual_surface(mesh, normals);
  cf.vertices.resize(mesh.num_vertices());
  parallel_for(mesh.num_vertices(), [&](int v) { cf.vertices[v] = analyze_vertex(cf.dual, mesh, v); });
  cf.faces.resize(mesh.num_faces());
  parallel_for(mesh.num_faces(), [&](int k) { cf.faces[k] = analyze_dual_vertex(cf.dual, mesh, k); });
  return cf;
}

struct OverlapPiece {
  int fan_triangle = -1;
  Polygon2 polygon;  // in the Q_i frame, counterclockwise
  double area = 0.0;
};

struct OverlapCell {
  int vertex = -1;
  int face = -1;
  Polygon2 projected;  // G_k projected onto the Q_i plane, counterclockwise
  Polygon2 dstar;      // Q_i clipped by the projection (convex path only)
  std::vector<OverlapPiece> pieces;
  double area = 0.0;   // area of D*
  bool empty = true;
  bool liftable = false;
  Mat2 jacobian = Mat2::Identity();  // psi' from Q_i frame to G_k frame
  Polygon2 preimage;                 // D in the G_k frame (convex path only)
  VertexFrame q_frame;
  VertexFrame g_frame;
};

namespace detail {

inline double area_tol(const Polygon2& p) {
  double d = diameter(p);
  return kGeomRel * d * d;
}

/// Lift of a Q_i-frame point along nu onto the plane of G_k.
inline Vec3 lift_to_face(const VertexFrame& qf, const VertexFrame& gf, const Vec3& g_point, const Vec2& x) {
  Vec3 base = qf.to_world(x);
  double t = gf.normal.dot(g_point - base) / gf.normal.dot(qf.normal);
  return base + t * qf.normal;
}

}  // namespace detail

/// Cells D* for every face incident to v. The fan triangles of Q_i are the source
/// triangles of the vertex tensor samples.
inline std::vector<OverlapCell> overlap_cells(const TriMesh& mesh, const CurvatureField& field, int v) {
  const VertexAnalysis& va = field.vertices[v];
  if (!va.regularity.usable() || !va.q)
    throw Error(ErrorCode::NotRegularEnough, "vertex " + std::to_string(v) + " has no usable dual face");
  const DualFace& q = *va.q;
  std::vector<Polygon2> fan;
  for (const auto& s : va.samples) fan.emplace_back(make_ccw(Polygon2{s.source[0], s.source[1], s.source[2]}));
  Polygon2 Q = make_ccw(q.q);
  bool q_convex = is_convex(Q);
  double qtol = detail::area_tol(Q);
  std::vector<OverlapCell> cells;
  bool any = false;
  for (int k : q.faces) {
    OverlapCell cell;
    cell.vertex = v;
    cell.face = k;
    cell.q_frame = q.frame;
    cell.g_frame = face_frame(mesh, k, mesh.position(mesh.triangle(k)[0]));
    Polygon2 proj;
    for (int c : mesh.triangle(k)) proj.push_back(q.frame.to_local(mesh.position(c)));
    cell.projected = make_ccw(proj);
    double cosang = cell.g_frame.normal.dot(q.frame.normal);
    cell.liftable = std::abs(cosang) > 1e-12;
    if (cell.liftable) {
      Eigen::Matrix<double, 3, 2> eq = q.frame.basis();
      Mat3 lift = Mat3::Identity() - q.frame.normal * cell.g_frame.normal.transpose() / cosang;
      cell.jacobian = cell.g_frame.basis().transpose() * lift * eq;
    }
    if (std::abs(signed_area(cell.projected)) > detail::area_tol(cell.projected)) {
      for (std::size_t m = 0; m < fan.size(); ++m) {
        Polygon2 piece = clip_convex(cell.projected, fan[m]);
        if (piece.size() < 3) continue;
        double a = signed_area(piece);
        if (a <= qtol) continue;
        cell.pieces.push_back(OverlapPiece{static_cast<int>(m), piece, a});
        cell.area += a;
      }
      if (q_convex) cell.dstar = clip_convex(cell.projected, Q);
    }
    cell.empty = cell.pieces.empty();
    if (!cell.empty) any = true;
    if (cell.liftable && !cell.dstar.empty()) {
      const Vec3& gp = mesh.position(mesh.triangle(k)[0]);
      for (const auto& x : cell.dstar)
        cell.preimage.push_back(cell.g_frame.to_local(detail::lift_to_face(q.frame, cell.g_frame, gp, x)));
    }
    cells.push_back(std::move(cell));
  }
  if (!any) throw Error(ErrorCode::EmptyOverlap, "no face of vertex " + std::to_string(v) + " overlaps its dual face");
  return cells;
}

/// Piecewise-affine map from the dual surface to the primal surface.
class PsiMap {
 public:
  PsiMap() = default;
  PsiMap(const TriMesh* mesh, std::vector<std::vector<OverlapCell>> cells) : mesh_(mesh), cells_(std::move(cells)) {}

  const std::vector<OverlapCell>& cells(int v) const { return cells_.at(v); }
  int num_vertices() const { return static_cast<int>(cells_.size()); }

  struct Location {
    int cell = -1;
    int piece = -1;
  };

  std::optional<Location> locate(int v, const Vec2& x) const {
    if (v < 0 || v >= num_vertices()) return std::nullopt;
    const auto& cs = cells_[v];
    for (std::size_t c = 0; c < cs.size(); ++c) {
      if (!cs[c].liftable) continue;
      for (std::size_t p = 0; p < cs[c].pieces.size(); ++p) {
        const Polygon2& poly = cs[c].pieces[p].polygon;
        double tol = 1e-10 * std::max(diameter(poly), 1e-300);
        bool inside = true;
        for (std::size_t e = 0; e < poly.size() && inside; ++e) {
          const Vec2& a = poly[e];
          const Vec2& b = poly[(e + 1) % poly.size()];
          double len = (b - a).norm();
          if (len > 0 && orient2(a, b, x) / len < -tol) inside = false;
        }
        if (inside) return Location{static_cast<int>(c), static_cast<int>(p)};
      }
    }
    return std::nullopt;
  }

  /// Image on P_h of the point x (Q_v frame coordinates) of dual face v.
  Vec3 evaluate(int v, const Vec2& x) const {
    auto loc = locate(v, x);
    if (!loc) throw Error(ErrorCode::UnlocatedPoint, "point is outside every overlap cell of vertex " + std::to_string(v));
    const OverlapCell& cell = cells_[v][loc->cell];
    const Vec3& gp = mesh_->position(mesh_->triangle(cell.face)[0]);
    return detail::lift_to_face(cell.q_frame, cell.g_frame, gp, x);
  }

  /// Inverse on the star of v: orthogonal projection into the Q_v frame.
  Vec2 inverse(int v, const Vec3& x) const {
    if (v < 0 || v >= num_vertices() || cells_[v].empty())
      throw Error(ErrorCode::UnlocatedPoint, "vertex " + std::to_string(v) + " has no cells");
    return cells_[v].front().q_frame.to_local(x);
  }

 private:
  const TriMesh* mesh_ = nullptr;
  std::vector<std::vector<OverlapCell>> cells_;
};

/// strict: every interior vertex must be usable, otherwise NotRegularEnough.
inline PsiMap build_psi(const TriMesh& mesh, const CurvatureField& field, bool strict = true) {
  std::vector<std::vector<OverlapCell>> cells(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.is_boundary_vertex(v) || mesh.is_isolated(v)) continue;
    if (!field.vertices[v].regularity.usable()) {
      if (strict) throw Error(ErrorCode::NotRegularEnough, "vertex " + std::to_string(v) + " is not regular");
      continue;
    }
    try {
      cells[v] = overlap_cells(mesh, field, v);
    } catch (const Error& e) {
      if (strict || e.code() != ErrorCode::EmptyOverlap) throw;
    }
  }
  return PsiMap(&mesh, std::move(cells));
}

struct DeviationRecord {
  int vertex = -1;
  int face = -1;
  int fan_triangle = -1;
  double delta = 0.0;
  double det_gap = 0.0;     // |det A_k - det A*|
  double dual_area = 0.0;   // piece area on Q_i
  double primal_area = 0.0; // mapped area on G_k
};

struct DeviationField {
  std::vector<DeviationRecord> records;  // ordered by (vertex, face, fan triangle)
  double sup = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  int skipped_vertices = 0;
  int skipped_cells = 0;
};

struct VertexDeviation {
  std::vector<DeviationRecord> records;
  int skipped_cells = 0;
  bool evaluable = false;
};

/// delta = || R A_k psi' - A*_m ||_F per piece, R the minimal rotation carrying the
/// face plane onto the vertex tangent plane, expressed between the two frames.
inline VertexDeviation vertex_deviation(const TriMesh& mesh, const CurvatureField& field, int v) {
  VertexDeviation out;
  const VertexAnalysis& va = field.vertices[v];
  if (mesh.is_boundary_vertex(v) || mesh.is_isolated(v) || !va.regularity.usable()) return out;
  std::vector<OverlapCell> cells;
  try {
    cells = overlap_cells(mesh, field, v);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyOverlap) throw;
    return out;
  }
  out.evaluable = true;
  for (const auto& cell : cells) {
    const DualVertexCurvature& dk = field.faces[cell.face];
    if (!dk.defined || !cell.liftable) {
      out.skipped_cells += !cell.empty;
      continue;
    }
    const VertexFrame& gf = dk.b.frame;
    Mat3 rot = rotation_between(gf.normal, cell.q_frame.normal);
    Mat2 r2 = cell.q_frame.basis().transpose() * rot * gf.basis();
    Eigen::Matrix<double, 3, 2> eq = cell.q_frame.basis();
    double cosang = gf.normal.dot(cell.q_frame.normal);
    Mat3 lift = Mat3::Identity() - cell.q_frame.normal * gf.normal.transpose() / cosang;
    Mat2 psi = gf.basis().transpose() * lift * eq;
    Mat2 primal = r2 * dk.sample.A * psi;
    double det_psi = std::abs(psi.determinant());
    for (const auto& piece : cell.pieces) {
      const CurvatureTensorSample& s = va.samples[piece.fan_triangle];
      DeviationRecord r;
      r.vertex = v;
      r.face = cell.face;
      r.fan_triangle = piece.fan_triangle;
      r.delta = (primal - s.A).norm();
      r.det_gap = std::abs(dk.sample.A.determinant() - s.A.determinant());
      r.dual_area = piece.area;
      r.primal_area = piece.area * det_psi;
      out.records.push_back(r);
    }
  }
  return out;
}

/// delta_2 = sum delta^2 * area, delta_1 = sum (delta + det gap) * area, areas on P_h.
inline std::pair<double, double> deviation_integrals(const std::vector<DeviationRecord>& records) {
  double d1 = 0.0, d2 = 0.0;
  for (const auto& r : records) {
    d2 += r.delta * r.delta * r.primal_area;
    d1 += (r.delta + r.det_gap) * r.primal_area;
  }
  return {d1, d2};
}

inline std::pair<double, double> deviation_integrals(const DeviationField& field) {
  return deviation_integrals(field.records);
}

inline DeviationField deviation(const TriMesh& mesh, const CurvatureField& field, bool strict = false) {
  std::vector<VertexDeviation> per(mesh.num_vertices());
  parallel_for(mesh.num_vertices(), [&](int v) { per[v] = vertex_deviation(mesh, field, v); });
  DeviationField out;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.is_boundary_vertex(v) || mesh.is_isolated(v)) continue;
    if (!per[v].evaluable) {
      if (strict) throw Error(ErrorCode::NotRegularEnough, "vertex " + std::to_string(v) + " is not regular");
      ++out.skipped_vertices;
      continue;
    }
    out.skipped_cells += per[v].skipped_cells;
    for (const auto& r : per[v].records) {
      out.records.push_back(r);
      out.sup = std::max(out.sup, r.delta);
    }
  }
  std::tie(out.delta1, out.delta2) = deviation_integrals(out.records);
  return out;
}

inline DeviationField deviation(const TriMesh& mesh, const std::vector<Vec3>& normals, bool strict = false) {
  return deviation(mesh, compute_curvature_field(mesh, normals), strict);
}

}  // namespace polarcurv
