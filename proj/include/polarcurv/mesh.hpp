#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "polarcurv/error.hpp"
#include "polarcurv/linalg.hpp"

namespace polarcurv {

using Triangle = std::array<int, 3>;

/// Undirected edge (v0 < v1) with one representative half-edge.
struct Edge {
  int v0 = -1;
  int v1 = -1;
  int halfedge = -1;
};

class TriMesh;
TriMesh build_mesh(std::vector<Vec3> positions, std::vector<Triangle> triangles);

/// Indexed, consistently oriented triangle surface. Half-edge h = 3f + j runs from
/// triangle(f)[j] to triangle(f)[(j+1)%3]. Immutable after build_mesh.
class TriMesh {
 public:
  TriMesh() = default;

  const std::vector<Vec3>& positions() const { return positions_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }

  int num_vertices() const { return static_cast<int>(positions_.size()); }
  int num_faces() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_halfedges() const { return 3 * num_faces(); }

  const Vec3& position(int v) const { return positions_[v]; }
  const Triangle& triangle(int f) const { return triangles_[f]; }

  static int face_of(int h) { return h / 3; }
  static int next(int h) { return 3 * (h / 3) + (h % 3 + 1) % 3; }
  static int prev(int h) { return 3 * (h / 3) + (h % 3 + 2) % 3; }
  int origin(int h) const { return triangles_[h / 3][h % 3]; }
  int target(int h) const { return triangles_[h / 3][(h % 3 + 1) % 3]; }
  int twin(int h) const { return twin_[h]; }
  int edge_of(int h) const { return edge_of_halfedge_[h]; }

  /// Outgoing half-edge of v that starts its counterclockwise fan: on the boundary
  /// the one without a twin, otherwise the one in the lowest-index incident face.
  /// -1 for isolated vertices.
  int fan_start(int v) const { return fan_start_[v]; }

  bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }
  bool is_boundary_edge(int e) const { return twin_[edges_[e].halfedge] < 0; }
  bool is_isolated(int v) const { return fan_start_[v] < 0; }
  bool is_closed() const {
    return std::none_of(twin_.begin(), twin_.end(), [](int t) { return t < 0; });
  }

  /// Edge index joining a and b, or -1.
  int find_edge(int a, int b) const {
    auto it = edge_lookup_.find(key(std::min(a, b), std::max(a, b)));
    return it == edge_lookup_.end() ? -1 : it->second;
  }

  Vec3 face_normal_raw(int f) const {
    const Triangle& t = triangles_[f];
    return (positions_[t[1]] - positions_[t[0]]).cross(positions_[t[2]] - positions_[t[0]]);
  }
  Vec3 face_normal(int f) const { return face_normal_raw(f).normalized(); }
  double face_area(int f) const { return 0.5 * face_normal_raw(f).norm(); }
  double total_area() const {
    double s = 0.0;
    for (int f = 0; f < num_faces(); ++f) s += face_area(f);
    return s;
  }
  double edge_length(int e) const { return (positions_[edges_[e].v1] - positions_[edges_[e].v0]).norm(); }

  /// Bounding-box diagonal; the length scale for relative tolerances.
  double diameter() const { return diameter_; }

  int euler_characteristic() const { return num_vertices() - num_edges() + num_faces(); }

 private:
  friend TriMesh build_mesh(std::vector<Vec3> positions, std::vector<Triangle> triangles);

  static std::uint64_t key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }

  std::vector<Vec3> positions_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<int> twin_;
  std::vector<int> edge_of_halfedge_;
  std::vector<int> fan_start_;
  std::vector<char> boundary_vertex_;
  std::unordered_map<std::uint64_t, int> edge_lookup_;
  double diameter_ = 0.0;
};

/// Relative degeneracy threshold: face area must exceed kDegenerateRel * diameter^2.
inline constexpr double kDegenerateRel = 1e-14;

inline TriMesh build_mesh(std::vector<Vec3> positions, std::vector<Triangle> triangles) {
  TriMesh m;
  const int nv = static_cast<int>(positions.size());
  const int nf = static_cast<int>(triangles.size());

  for (int f = 0; f < nf; ++f) {
    const Triangle& t = triangles[f];
    for (int v : t) {
      if (v < 0 || v >= nv)
        throw Error(ErrorCode::IndexOutOfRange,
                    "triangle " + std::to_string(f) + " references vertex " + std::to_string(v));
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw Error(ErrorCode::DegenerateTriangle, "triangle " + std::to_string(f) + " repeats a vertex");
  }

  if (nv > 0) {
    Vec3 lo = positions[0];
    Vec3 hi = positions[0];
    for (const auto& p : positions) {
      if (!p.allFinite()) throw Error(ErrorCode::DegenerateTriangle, "non-finite vertex position");
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    m.diameter_ = (hi - lo).norm();
  }
  m.positions_ = std::move(positions);
  m.triangles_ = std::move(triangles);

  const double min_area = kDegenerateRel * m.diameter_ * m.diameter_;
  for (int f = 0; f < nf; ++f) {
    if (!(m.face_area(f) > min_area))
      throw Error(ErrorCode::DegenerateTriangle, "triangle " + std::to_string(f) + " has (near) zero area");
  }

  // Directed and undirected edge tables.
  const int nh = 3 * nf;
  m.twin_.assign(nh, -1);
  m.edge_of_halfedge_.assign(nh, -1);
  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(nh * 2);
  std::unordered_map<std::uint64_t, std::vector<int>> undirected;
  undirected.reserve(nh * 2);
  for (int h = 0; h < nh; ++h) {
    int a = m.origin(h);
    int b = m.target(h);
    undirected[TriMesh::key(std::min(a, b), std::max(a, b))].push_back(h);
  }
  for (auto& [k, hs] : undirected) {
    if (hs.size() > 2)
      throw Error(ErrorCode::NonManifold, "edge (" + std::to_string(k >> 32) + "," +
                                              std::to_string(k & 0xffffffffu) + ") borders " +
                                              std::to_string(hs.size()) + " triangles");
    if (hs.size() == 2) {
      if (m.origin(hs[0]) == m.origin(hs[1]))
        throw Error(ErrorCode::InconsistentOrientation,
                    "triangles " + std::to_string(hs[0] / 3) + " and " + std::to_string(hs[1] / 3) +
                        " induce the same direction on their shared edge");
      m.twin_[hs[0]] = hs[1];
      m.twin_[hs[1]] = hs[0];
    }
  }

  // Edges in ascending (v0, v1) order.
  std::vector<Edge> edges;
  edges.reserve(undirected.size());
  for (auto& [k, hs] : undirected) {
    Edge e;
    e.v0 = static_cast<int>(k >> 32);
    e.v1 = static_cast<int>(k & 0xffffffffu);
    e.halfedge = *std::min_element(hs.begin(), hs.end());
    edges.push_back(e);
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& x, const Edge& y) { return x.v0 < y.v0 || (x.v0 == y.v0 && x.v1 < y.v1); });
  m.edges_ = std::move(edges);
  m.edge_lookup_.reserve(m.edges_.size() * 2);
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& ed = m.edges_[e];
    m.edge_lookup_[TriMesh::key(ed.v0, ed.v1)] = e;
    int h = ed.halfedge;
    m.edge_of_halfedge_[h] = e;
    if (m.twin_[h] >= 0) m.edge_of_halfedge_[m.twin_[h]] = e;
  }

  // Fans: each vertex must carry a single cycle (interior) or a single chain (boundary).
  std::vector<int> incident_faces(nv, 0);
  std::vector<int> lowest_out(nv, -1);
  std::vector<int> boundary_out(nv, -1);
  std::vector<int> boundary_out_count(nv, 0);
  for (int h = 0; h < nh; ++h) {
    int v = m.origin(h);
    ++incident_faces[v];
    if (lowest_out[v] < 0) lowest_out[v] = h;
    if (m.twin_[h] < 0) {
      boundary_out[v] = h;
      ++boundary_out_count[v];
    }
  }
  m.fan_start_.assign(nv, -1);
  m.boundary_vertex_.assign(nv, 0);
  for (int v = 0; v < nv; ++v) {
    if (incident_faces[v] == 0) continue;
    if (boundary_out_count[v] > 1)
      throw Error(ErrorCode::NonManifold, "vertex " + std::to_string(v) + " joins several fans");
    int start = boundary_out_count[v] == 1 ? boundary_out[v] : lowest_out[v];
    m.boundary_vertex_[v] = boundary_out_count[v] == 1 ? 1 : 0;
    m.fan_start_[v] = start;
    int count = 0;
    int h = start;
    while (true) {
      ++count;
      int back = m.twin_[TriMesh::prev(h)];
      if (back < 0 || back == start) break;
      h = back;
      if (count > incident_faces[v]) break;
    }
    if (count != incident_faces[v])
      throw Error(ErrorCode::NonManifold, "vertex " + std::to_string(v) + " joins several fans");
  }
  return m;
}

/// Faces (and rim vertices) around a vertex in counterclockwise order seen from
/// outside. Face j spans rim[j] and rim[j+1] (cyclically for interior vertices;
/// boundary vertices carry one more rim vertex than faces).
struct VertexStar {
  int center = -1;
  std::vector<int> faces;
  std::vector<int> rim;
  bool boundary = false;

  int size() const { return static_cast<int>(faces.size()); }
  int rim_after(int j) const { return rim[(j + 1) % rim.size()]; }
};

inline void check_vertex(const TriMesh& mesh, int v) {
  if (v < 0 || v >= mesh.num_vertices())
    throw Error(ErrorCode::IndexOutOfRange, "vertex " + std::to_string(v));
}

inline VertexStar vertex_star(const TriMesh& mesh, int v) {
  check_vertex(mesh, v);
  VertexStar star;
  star.center = v;
  star.boundary = mesh.is_boundary_vertex(v);
  int start = mesh.fan_start(v);
  if (start < 0) return star;
  int h = start;
  while (true) {
    star.faces.push_back(TriMesh::face_of(h));
    star.rim.push_back(mesh.target(h));
    int p = TriMesh::prev(h);
    int back = mesh.twin(p);
    if (back < 0) {
      star.rim.push_back(mesh.origin(p));
      break;
    }
    if (back == start) break;
    h = back;
  }
  return star;
}

/// Vertices at graph distance <= depth from v, ascending.
inline std::vector<int> vertex_ring(const TriMesh& mesh, int v, int depth) {
  std::vector<int> frontier{v};
  std::vector<int> seen{v};
  for (int d = 0; d < depth; ++d) {
    std::vector<int> next;
    for (int u : frontier) {
      for (int w : vertex_star(mesh, u).rim) {
        if (std::find(seen.begin(), seen.end(), w) == seen.end()) {
          seen.push_back(w);
          next.push_back(w);
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(seen.begin(), seen.end());
  return seen;
}

/// Angle in [0, pi] between the unit normals of the two faces sharing edge e.
inline double dihedral_turn_angle(const TriMesh& mesh, int e) {
  if (e < 0 || e >= mesh.num_edges()) throw Error(ErrorCode::IndexOutOfRange, "edge " + std::to_string(e));
  int h = mesh.edges()[e].halfedge;
  int t = mesh.twin(h);
  if (t < 0) throw Error(ErrorCode::BoundaryEdge, "edge " + std::to_string(e) + " has one incident face");
  Vec3 n1 = mesh.face_normal(TriMesh::face_of(h));
  Vec3 n2 = mesh.face_normal(TriMesh::face_of(t));
  return std::atan2(n1.cross(n2).norm(), n1.dot(n2));
}

inline double dihedral_turn_angle(const TriMesh& mesh, int a, int b) {
  int e = mesh.find_edge(a, b);
  if (e < 0) throw Error(ErrorCode::IndexOutOfRange, "no edge between the given vertices");
  return dihedral_turn_angle(mesh, e);
}

/// Interior angle of face f at its corner vertex v.
inline double corner_angle(const TriMesh& mesh, int f, int v) {
  const Triangle& t = mesh.triangle(f);
  int j = t[0] == v ? 0 : (t[1] == v ? 1 : 2);
  const Vec3& p = mesh.position(t[j]);
  Vec3 a = mesh.position(t[(j + 1) % 3]) - p;
  Vec3 b = mesh.position(t[(j + 2) % 3]) - p;
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace polarcurv
