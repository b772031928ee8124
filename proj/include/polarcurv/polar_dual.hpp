#pragma once

// Dual faces Q_i, normal images F_i, the dual surface and the dual-vertex normal
// images B_k. All 2D polygons are expressed in a local orthonormal frame.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "polarcurv/mesh.hpp"
#include "polarcurv/parallel.hpp"
#include "polarcurv/polygon2d.hpp"

namespace polarcurv {

inline constexpr double kUnitNormalTol = 1e-9;

struct VertexFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();

  Vec2 to_local(const Vec3& x) const {
    Vec3 d = x - origin;
    return Vec2(d.dot(e1), d.dot(e2));
  }
  Vec2 direction_to_local(const Vec3& d) const { return Vec2(d.dot(e1), d.dot(e2)); }
  Vec3 to_world(const Vec2& u, double height = 0.0) const {
    return origin + u.x() * e1 + u.y() * e2 + height * normal;
  }
  /// Columns e1, e2.
  Eigen::Matrix<double, 3, 2> basis() const {
    Eigen::Matrix<double, 3, 2> b;
    b.col(0) = e1;
    b.col(1) = e2;
    return b;
  }
};

inline void check_unit(const Vec3& n, const std::string& what) {
  if (!n.allFinite() || std::abs(n.norm() - 1.0) > kUnitNormalTol)
    throw Error(ErrorCode::NonUnitNormal, what + " has length " + std::to_string(n.norm()));
}

inline VertexFrame make_frame(const Vec3& origin, const Vec3& unit_normal) {
  VertexFrame f;
  f.origin = origin;
  f.normal = unit_normal;
  std::tie(f.e1, f.e2) = tangent_basis(unit_normal);
  return f;
}

inline VertexFrame vertex_frame(const TriMesh& mesh, int v, const Vec3& normal) {
  check_vertex(mesh, v);
  check_unit(normal, "normal at vertex " + std::to_string(v));
  return make_frame(mesh.position(v), normal);
}

/// Frame of face k: origin at `origin`, unit face normal, standard basis rule.
inline VertexFrame face_frame(const TriMesh& mesh, int k, const Vec3& origin) {
  return make_frame(origin, mesh.face_normal(k));
}

struct DualFace {
  int center = -1;
  std::vector<int> faces;       // star order
  Polygon2 q;                   // frame coordinates
  std::vector<Vec3> q3;         // 3D dual vertices
  std::vector<double> residuals;
  VertexFrame frame;
};

struct NormalImagePolygon {
  int center = -1;              // primal vertex (F_i) or primal face (B_k)
  std::vector<int> sources;     // incident faces for F_i, dual faces (primal vertices) for B_k
  Polygon2 f;
  std::vector<Vec3> f3;
  double offset = 1.0;
  VertexFrame frame;
};

namespace detail {

inline double normals_check(const std::vector<Vec3>& normals, const TriMesh& mesh) {
  if (static_cast<int>(normals.size()) != mesh.num_vertices())
    throw Error(ErrorCode::InvalidParams, "need exactly one normal per vertex");
  return 0.0;
}

/// Intersection of tangent planes at the three corners of face k, with the row of
/// vertex `first` placed first.
inline std::optional<Solve3Result> tangent_planes_point(const TriMesh& mesh, const std::vector<Vec3>& normals,
                                                        int k, int first) {
  const Triangle& t = mesh.triangle(k);
  int j = t[0] == first ? 0 : (t[1] == first ? 1 : 2);
  std::array<Plane, 3> planes;
  for (int r = 0; r < 3; ++r) {
    int v = t[(j + r) % 3];
    planes[r] = Plane{normals[v], normals[v].dot(mesh.position(v))};
  }
  return try_intersect_planes(planes);
}

}  // namespace detail

/// Q_i: one vertex per incident face, the intersection of the tangent planes at the
/// corners of that face.
inline DualFace dual_face(const TriMesh& mesh, const std::vector<Vec3>& normals, int v) {
  check_vertex(mesh, v);
  detail::normals_check(normals, mesh);
  if (mesh.is_boundary_vertex(v) || mesh.is_isolated(v))
    throw Error(ErrorCode::BoundaryVertex, "vertex " + std::to_string(v) + " lies on the boundary");
  VertexStar star = vertex_star(mesh, v);
  DualFace out;
  out.center = v;
  out.frame = vertex_frame(mesh, v, normals[v]);
  out.faces = star.faces;
  for (int k : star.faces) {
    for (int u : mesh.triangle(k)) check_unit(normals[u], "normal at vertex " + std::to_string(u));
    auto s = detail::tangent_planes_point(mesh, normals, k, v);
    if (!s)
      throw Error(ErrorCode::SingularSystem,
                  "tangent planes around face " + std::to_string(k) + " do not meet in a point");
    out.q3.push_back(s->x);
    out.q.push_back(out.frame.to_local(s->x));
    out.residuals.push_back(s->residual);
  }
  return out;
}

/// f_k = p_i + x where nu.x = |nu| and x is orthogonal to both edges of G_k at p_i.
inline std::optional<Vec3> normal_image_vertex(const TriMesh& mesh, int v, int k, const Vec3& normal) {
  const Triangle& t = mesh.triangle(k);
  int j = t[0] == v ? 0 : (t[1] == v ? 1 : 2);
  const Vec3& p = mesh.position(v);
  Mat3 a;
  a.row(0) = normal.transpose();
  a.row(1) = (mesh.position(t[(j + 1) % 3]) - p).transpose();
  a.row(2) = (mesh.position(t[(j + 2) % 3]) - p).transpose();
  auto s = try_solve3(a, Vec3(normal.norm(), 0.0, 0.0));
  if (!s) return std::nullopt;
  return p + s->x;
}

inline NormalImagePolygon normal_image(const TriMesh& mesh, int v, const Vec3& normal) {
  VertexFrame frame = vertex_frame(mesh, v, normal);
  VertexStar star = vertex_star(mesh, v);
  if (star.faces.empty()) throw Error(ErrorCode::BoundaryVertex, "vertex " + std::to_string(v) + " is isolated");
  NormalImagePolygon out;
  out.center = v;
  out.frame = frame;
  out.sources = star.faces;
  for (int k : star.faces) {
    auto f = normal_image_vertex(mesh, v, k, normal);
    if (!f)
      throw Error(ErrorCode::SingularSystem, "face " + std::to_string(k) + " has an edge parallel to the normal");
    out.f3.push_back(*f);
    out.f.push_back(frame.to_local(*f));
  }
  return out;
}

enum class DualStatus { Defined, Boundary, Singular, UndefinedNeighbor };

inline const char* to_string(DualStatus s) {
  switch (s) {
    case DualStatus::Defined: return "defined";
    case DualStatus::Boundary: return "boundary";
    case DualStatus::Singular: return "singular";
    case DualStatus::UndefinedNeighbor: return "undefined-neighbor";
  }
  return "?";
}

struct DualVertex {
  bool defined = false;
  Vec3 q = Vec3::Zero();
  double residual = 0.0;
  double consistency = 0.0;  // max disagreement between the per-corner solves
};

struct DualFaceRecord {
  DualStatus status = DualStatus::Boundary;
  DualFace face;                          // valid when status == Defined
  std::optional<NormalImagePolygon> image;  // F_i, when every incident system is regular
  bool simple = false;
  bool convex = false;
  int self_intersections = 0;
};

struct DualEdge {
  int primal_edge = -1;
  int face_a = -1;  // dual vertex endpoints (primal faces)
  int face_b = -1;
  bool defined = false;
};

struct DualSurface {
  std::vector<Vec3> normals;
  std::vector<DualVertex> vertices;   // one per primal face
  std::vector<DualFaceRecord> faces;  // one per primal vertex
  std::vector<DualEdge> edges;        // one per interior primal edge
  double consistency_error = 0.0;
  int num_defined_faces() const {
    int n = 0;
    for (const auto& f : faces) n += f.status == DualStatus::Defined;
    return n;
  }
  int num_interior_vertices = 0;
};

inline DualVertex compute_dual_vertex(const TriMesh& mesh, const std::vector<Vec3>& normals, int k) {
  DualVertex dv;
  const Triangle& t = mesh.triangle(k);
  auto s0 = detail::tangent_planes_point(mesh, normals, k, t[0]);
  if (!s0) return dv;
  dv.defined = true;
  dv.q = s0->x;
  dv.residual = s0->residual;
  for (int j = 1; j < 3; ++j) {
    auto s = detail::tangent_planes_point(mesh, normals, k, t[j]);
    double d = s ? (s->x - s0->x).norm() : std::numeric_limits<double>::infinity();
    dv.consistency = std::max(dv.consistency, d / std::max(1.0, s0->x.norm()));
  }
  return dv;
}

/// Q_i assembled from already computed dual vertices, plus F_i and shape flags.
inline DualFaceRecord compute_dual_face_record(const TriMesh& mesh, const std::vector<Vec3>& normals,
                                               const std::vector<DualVertex>& vertices, int v) {
  DualFaceRecord rec;
  if (mesh.is_isolated(v) || mesh.is_boundary_vertex(v)) {
    rec.status = DualStatus::Boundary;
    return rec;
  }
  VertexStar star = vertex_star(mesh, v);
  for (int k : star.faces)
    if (!vertices[k].defined) {
      rec.status = DualStatus::Singular;
      return rec;
    }
  DualFace face;
  face.center = v;
  face.frame = vertex_frame(mesh, v, normals[v]);
  face.faces = star.faces;
  for (int k : star.faces) {
    face.q3.push_back(vertices[k].q);
    face.q.push_back(face.frame.to_local(vertices[k].q));
    face.residuals.push_back(vertices[k].residual);
  }
  rec.face = std::move(face);
  rec.status = DualStatus::Defined;
  double tol = 1e-10 * std::max(diameter(rec.face.q), 1e-300);
  rec.self_intersections = count_self_intersections(rec.face.q, tol);
  rec.simple = is_simple(rec.face.q);
  rec.convex = rec.simple && is_convex(rec.face.q);
  try {
    rec.image = normal_image(mesh, v, normals[v]);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularSystem) throw;
    rec.image.reset();
  }
  return rec;
}

inline void collect_dual_edges(const TriMesh& mesh, DualSurface& dual) {
  dual.edges.clear();
  for (int e = 0; e < mesh.num_edges(); ++e) {
    int h = mesh.edges()[e].halfedge;
    int t = mesh.twin(h);
    if (t < 0) continue;
    DualEdge de;
    de.primal_edge = e;
    de.face_a = std::min(TriMesh::face_of(h), TriMesh::face_of(t));
    de.face_b = std::max(TriMesh::face_of(h), TriMesh::face_of(t));
    de.defined = dual.vertices[de.face_a].defined && dual.vertices[de.face_b].defined;
    dual.edges.push_back(de);
  }
}

inline DualSurface build_dual_surface(const TriMesh& mesh, const std::vector<Vec3>& normals) {
  detail::normals_check(normals, mesh);
  for (int v = 0; v < mesh.num_vertices(); ++v) check_unit(normals[v], "normal at vertex " + std::to_string(v));
  DualSurface dual;
  dual.normals = normals;
  dual.vertices.resize(mesh.num_faces());
  parallel_for(mesh.num_faces(), [&](int k) { dual.vertices[k] = compute_dual_vertex(mesh, normals, k); });
  for (const auto& dv : dual.vertices)
    if (dv.defined) dual.consistency_error = std::max(dual.consistency_error, dv.consistency);
  const int nv = mesh.num_vertices();
  dual.faces.resize(nv);
  parallel_for(nv, [&](int v) { dual.faces[v] = compute_dual_face_record(mesh, normals, dual.vertices, v); });
  for (int v = 0; v < nv; ++v)
    if (!mesh.is_isolated(v) && !mesh.is_boundary_vertex(v)) ++dual.num_interior_vertices;
  collect_dual_edges(mesh, dual);
  return dual;
}

/// B_k: for each corner p_i of G_k, the point b with n_G.(b - q_k) = 1 and b - q_k
/// orthogonal to the two dual edges of Q_i leaving q_k. Coordinates are in the frame
/// of G_k centred at q_k. Vertex order follows the corners of G_k.
inline NormalImagePolygon dual_vertex_normal_image(const DualSurface& dual, const TriMesh& mesh, int k) {
  if (k < 0 || k >= mesh.num_faces()) throw Error(ErrorCode::IndexOutOfRange, "face " + std::to_string(k));
  if (!dual.vertices[k].defined)
    throw Error(ErrorCode::SingularSystem, "dual vertex of face " + std::to_string(k) + " is undefined");
  const Triangle& t = mesh.triangle(k);
  for (int v : t)
    if (dual.faces[v].status != DualStatus::Defined)
      throw Error(ErrorCode::UndefinedNeighbor,
                  "dual face of vertex " + std::to_string(v) + " around face " + std::to_string(k) + " is undefined");
  const Vec3& qk = dual.vertices[k].q;
  NormalImagePolygon out;
  out.center = k;
  out.frame = face_frame(mesh, k, qk);
  const Vec3 ng = out.frame.normal;
  for (int v : t) {
    const DualFace& face = dual.faces[v].face;
    const int n = static_cast<int>(face.faces.size());
    int pos = static_cast<int>(std::find(face.faces.begin(), face.faces.end(), k) - face.faces.begin());
    const Vec3& qa = face.q3[(pos + n - 1) % n];
    const Vec3& qb = face.q3[(pos + 1) % n];
    Mat3 a;
    a.row(0) = ng.transpose();
    a.row(1) = (qa - qk).transpose();
    a.row(2) = (qb - qk).transpose();
    auto s = try_solve3(a, Vec3(1.0, 0.0, 0.0));
    if (!s)
      throw Error(ErrorCode::SingularSystem,
                  "dual edges around face " + std::to_string(k) + " are degenerate at vertex " + std::to_string(v));
    out.sources.push_back(v);
    out.f3.push_back(qk + s->x);
    out.f.push_back(out.frame.to_local(qk + s->x));
  }
  return out;
}

/// Plane x3 + pole_3 = p^T H x_h polar to `pole` with respect to x3 = 1/2 p^T H p.
struct PolarPlane {
  Mat2 H = Mat2::Zero();
  Vec3 pole = Vec3::Zero();
  Plane plane;  // normal (-H p, 1), offset -pole_3

  double evaluate(const Vec3& x) const { return plane.normal.dot(x) - plane.offset; }
  /// |value at pole| / |normal|; zero when the pole lies on the paraboloid.
  double contact_residual() const { return std::abs(evaluate(pole)) / plane.normal.norm(); }
};

inline PolarPlane polar_plane(const Mat2& H, const Vec3& pole) {
  PolarPlane pp;
  pp.H = H;
  pp.pole = pole;
  Vec2 g = H * Vec2(pole.x(), pole.y());
  pp.plane = Plane{Vec3(-g.x(), -g.y(), 1.0), -pole.z()};
  return pp;
}

/// Polarity analogue of dual_face: Q_i vertices are intersections of the planes
/// polar to the corners of each incident face; coordinates are the horizontal
/// components relative to p_i. Assumes the chart in which p_i lies on the x3 axis.
inline Polygon2 polar_dual_face(const Mat2& H, const TriMesh& mesh, int v) {
  VertexStar star = vertex_star(mesh, v);
  if (star.boundary) throw Error(ErrorCode::BoundaryVertex, "vertex " + std::to_string(v) + " lies on the boundary");
  Polygon2 out;
  const Vec3& p = mesh.position(v);
  for (int k : star.faces) {
    std::array<Plane, 3> planes;
    for (int r = 0; r < 3; ++r) planes[r] = polar_plane(H, mesh.position(mesh.triangle(k)[r])).plane;
    auto s = try_intersect_planes(planes);
    if (!s) throw Error(ErrorCode::SingularSystem, "polar planes around face " + std::to_string(k) + " are singular");
    out.emplace_back(s->x.x() - p.x(), s->x.y() - p.y());
  }
  return out;
}

}  // namespace polarcurv
