#pragma once

// Curvature densities and discrete bending energies.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "polarcurv/correspondence.hpp"
#include "polarcurv/normals.hpp"

namespace polarcurv {

enum class DensityKind { Quadratic, MeanPlusAbs, Epsilon, Willmore };

struct EnergyDensityKind {
  DensityKind kind = DensityKind::Quadratic;
  double eps = 1.0;  // Epsilon only
};

inline const char* to_string(DensityKind k) {
  switch (k) {
    case DensityKind::Quadratic: return "quadratic";
    case DensityKind::MeanPlusAbs: return "mean-plus-abs";
    case DensityKind::Epsilon: return "epsilon";
    case DensityKind::Willmore: return "willmore";
  }
  return "?";
}

/// g(A): tr A^T A; sqrt(tr A^T A) + |det A|;
/// tr A^T A * sqrt(eps + |det A|) / sqrt(2 (eps + tr A^T A)); 1/2 tr A^T A - det A.
inline double density(const Mat2& a, const EnergyDensityKind& k) {
  if (!a.allFinite()) throw Error(ErrorCode::NonFinite, "tensor has non-finite entries");
  double t = (a.transpose() * a).trace();
  double d = a.determinant();
  switch (k.kind) {
    case DensityKind::Quadratic: return t;
    case DensityKind::MeanPlusAbs: return std::sqrt(t) + std::abs(d);
    case DensityKind::Epsilon:
      if (!(k.eps > 0.0) || !std::isfinite(k.eps)) throw Error(ErrorCode::BadEpsilon, "eps must be positive");
      return t * std::sqrt(k.eps + std::abs(d)) / std::sqrt(2.0 * (k.eps + t));
    case DensityKind::Willmore: return 0.5 * t - d;
  }
  return 0.0;
}

struct EnergyContribution {
  int entity = -1;  // vertex or edge index
  double value = 0.0;
};

struct EnergyReport {
  std::string kind;
  double total = 0.0;
  std::vector<EnergyContribution> contributions;  // ascending entity index
  std::vector<int> skipped;
  std::string note;
  double principal_defect_sum = 0.0;  // sum of delta(F_i), reported separately
};

namespace detail {

/// Pairwise sum of the contribution values in index order.
inline double pairwise_sum(const std::vector<EnergyContribution>& c, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += c[i].value;
    return s;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(c, lo, mid) + pairwise_sum(c, mid, hi);
}

inline void finish(EnergyReport& r) { r.total = pairwise_sum(r.contributions, 0, r.contributions.size()); }

}  // namespace detail

/// Sum over dual-face triangles of g(A*) * triangle area.
inline EnergyReport dual_energy(const TriMesh& mesh, const CurvatureField& field, const EnergyDensityKind& kind) {
  EnergyReport r;
  r.kind = std::string("dual-") + to_string(kind.kind);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const VertexAnalysis& va = field.vertices[v];
    if (!va.regularity.usable()) {
      r.skipped.push_back(v);
      continue;
    }
    double e = 0.0;
    for (const auto& s : va.samples) e += density(s.A, kind) * s.area;
    r.contributions.push_back({v, e});
  }
  detail::finish(r);
  return r;
}

inline constexpr double kSharpEdgeMargin = 1e-9;

/// Area of the normal image: absolute loop sum after removing repeated consecutive
/// vertices; zero when fewer than three distinct vertices remain.
inline double normal_image_area(const Polygon2& f) {
  double d = diameter(f);
  if (!(d > 0.0)) return 0.0;
  Polygon2 p = dedupe_consecutive(f, kLoopRel * d);
  if (p.size() < 3) return 0.0;
  bool collinear = true;
  for (std::size_t i = 2; i < p.size() && collinear; ++i)
    collinear = std::abs(orient2(p[0], p[1], p[i])) <= kGeomRel * d * d;
  if (collinear) return 0.0;
  return decompose_normal_image(p).absolute_sum;
}

/// sum_e |e| 2 tan(phi_e / 2) + sum_i area(F_i). Boundary entities are skipped.
inline EnergyReport edge_energy_normal(const TriMesh& mesh, const std::vector<Vec3>& normals) {
  EnergyReport r;
  r.kind = "edge-normal";
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.is_boundary_edge(e)) {
      r.skipped.push_back(e);
      continue;
    }
    double phi = dihedral_turn_angle(mesh, e);
    if (phi >= std::numbers::pi - kSharpEdgeMargin)
      throw Error(ErrorCode::SharpEdge, "edge " + std::to_string(e) + " folds back onto itself");
    r.contributions.push_back({e, mesh.edge_length(e) * 2.0 * std::tan(0.5 * phi)});
  }
  std::vector<EnergyContribution> vertex_terms;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.is_boundary_vertex(v) || mesh.is_isolated(v)) continue;
    NormalImagePolygon f = normal_image(mesh, v, normals[v]);
    vertex_terms.push_back({v, normal_image_area(f.f)});
  }
  double edges = detail::pairwise_sum(r.contributions, 0, r.contributions.size());
  double verts = detail::pairwise_sum(vertex_terms, 0, vertex_terms.size());
  for (auto& c : vertex_terms) c.entity += mesh.num_edges();
  r.contributions.insert(r.contributions.end(), vertex_terms.begin(), vertex_terms.end());
  r.total = edges + verts;
  r.note = "contributions: edges by edge index, then vertices offset by the edge count";
  return r;
}

/// |K_i|: |angle defect| when F_i is simple, otherwise the absolute loop area of F_i.
inline double absolute_vertex_curvature(const TriMesh& mesh, const Vec3& normal, int v) {
  NormalImagePolygon f = normal_image(mesh, v, normal);
  double d = diameter(f.f);
  Polygon2 p = d > 0.0 ? dedupe_consecutive(f.f, kLoopRel * d) : Polygon2{};
  if (p.size() < 3 || is_simple(p)) return std::abs(angle_defect(mesh, v));
  double a = normal_image_area(p);
  return a;
}

/// sum_e |e| phi_e + sum_i |K_i|. With empty `normals`, angle-weighted normals decide
/// whether each F_i is simple.
inline EnergyReport edge_energy_spherical(const TriMesh& mesh, const std::vector<Vec3>& normals = {}) {
  std::vector<Vec3> nrm = normals.empty() ? heuristic_normals(mesh, NormalWeighting::Angle).normals : normals;
  EnergyReport r;
  r.kind = "edge-spherical";
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.is_boundary_edge(e)) {
      r.skipped.push_back(e);
      continue;
    }
    r.contributions.push_back({e, mesh.edge_length(e) * dihedral_turn_angle(mesh, e)});
  }
  std::vector<EnergyContribution> vertex_terms;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.is_boundary_vertex(v) || mesh.is_isolated(v)) continue;
    vertex_terms.push_back({v, absolute_vertex_curvature(mesh, nrm[v], v)});
  }
  double edges = detail::pairwise_sum(r.contributions, 0, r.contributions.size());
  double verts = detail::pairwise_sum(vertex_terms, 0, vertex_terms.size());
  for (auto& c : vertex_terms) c.entity += mesh.num_edges();
  r.contributions.insert(r.contributions.end(), vertex_terms.begin(), vertex_terms.end());
  r.total = edges + verts;
  r.note = "|K_i| from the angle defect (simple F_i) or the absolute loop area of F_i; "
           "contributions: edges by edge index, then vertices offset by the edge count";
  return r;
}

/// Sum of principal-component defects delta(F_i) over interior vertices with a
/// self-intersecting normal image. Unclassifiable vertices are listed in `skipped`.
inline EnergyReport principal_defects(const TriMesh& mesh, const std::vector<Vec3>& normals) {
  EnergyReport r;
  r.kind = "principal-defect";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.is_boundary_vertex(v) || mesh.is_isolated(v)) continue;
    try {
      NormalImagePolygon f = normal_image(mesh, v, normals[v]);
      PrincipalComponent pc = principal_component(mesh, vertex_star(mesh, v), f);
      r.contributions.push_back({v, pc.defect});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unclassifiable && e.code() != ErrorCode::SingularSystem &&
          e.code() != ErrorCode::DegeneratePolyline)
        throw;
      r.skipped.push_back(v);
    }
  }
  detail::finish(r);
  r.principal_defect_sum = r.total;
  return r;
}

}  // namespace polarcurv
