#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "polarcurv/generators.hpp"
#include "polarcurv/polar_dual.hpp"

using namespace polarcurv;

namespace {

Mat2 diag(double a, double b) {
  Mat2 m;
  m << a, 0, 0, b;
  return m;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoError;
}

// Four-face fan around the origin with rim (+-s, 0), (0, +-s) lifted to the paraboloid.
TriMesh paraboloid_cross(const Mat2& h, double s) {
  auto lift = [&](double x, double y) { return Vec3(x, y, 0.5 * Vec2(x, y).dot(h * Vec2(x, y))); };
  std::vector<Vec3> pos{lift(0, 0), lift(s, 0), lift(0, s), lift(-s, 0), lift(0, -s)};
  return build_mesh(pos, {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 1}});
}

Mat2 random_symmetric(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  Mat2 h;
  h(0, 0) = u(rng);
  h(1, 1) = u(rng);
  h(0, 1) = h(1, 0) = u(rng);
  return h;
}

int index_of(const std::vector<int>& v, int x) { return static_cast<int>(std::find(v.begin(), v.end(), x) - v.begin()); }

}  // namespace

TEST(VertexFrame, AxisAlignedAndFallback) {
  TriMesh m = gen_sphere_mesh(0);
  VertexFrame f = vertex_frame(m, 4, Vec3::UnitZ());
  EXPECT_EQ(f.e1, Vec3::UnitX());
  EXPECT_EQ(f.e2, Vec3::UnitY());
  VertexFrame g = vertex_frame(m, 0, Vec3::UnitX());
  EXPECT_NEAR(g.e1.dot(g.normal), 0.0, 1e-14);
  EXPECT_NEAR(g.e1.norm(), 1.0, 1e-14);
  EXPECT_NEAR(g.e1.cross(g.e2).dot(g.normal), 1.0, 1e-14);
  EXPECT_EQ(g.e1, Vec3::UnitY());
  EXPECT_EQ(code_of([&] { vertex_frame(m, 4, Vec3(0, 0, 0.9)); }), ErrorCode::NonUnitNormal);
}

TEST(DualFace, ParaboloidHandSolve) {
  Mat2 h = diag(4, 0.4);
  TriMesh m = paraboloid_cross(h, 0.1);
  auto nrm = exact_normals(Paraboloid{h}, m);
  DualFace q = dual_face(m, nrm, 0);
  VertexStar star = vertex_star(m, 0);
  int j = index_of(star.faces, 0);  // face {0, (0.1,0), (0,0.1)}
  EXPECT_LT((q.q[j] - Vec2(0.05, 0.05)).norm(), 1e-14);
  NormalImagePolygon f = normal_image(m, 0, nrm[0]);
  EXPECT_LT((f.f[j] - Vec2(-0.2, -0.02)).norm(), 1e-14);
  for (std::size_t k = 0; k < q.q.size(); ++k) EXPECT_LT((f.f[k] + h * q.q[k]).norm(), 1e-14);
  for (double r : q.residuals) EXPECT_LT(r, 1e-12);
}

TEST(DualFace, OctahedronSquare) {
  TriMesh m = gen_sphere_mesh(0);
  auto nrm = exact_normals(Sphere{1.0}, m);
  DualFace q = dual_face(m, nrm, 4);
  NormalImagePolygon f = normal_image(m, 4, nrm[4]);
  ASSERT_EQ(q.q.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(std::abs(q.q[k].x()), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(q.q[k].y()), 1.0, 1e-14);
    EXPECT_LT((q.q[k] - f.f[k]).norm(), 1e-14);
  }
  int j = -1;
  for (std::size_t k = 0; k < 4; ++k) {
    auto t = m.triangle(q.faces[k]);
    if (std::find(t.begin(), t.end(), 0) != t.end() && std::find(t.begin(), t.end(), 2) != t.end()) j = k;
  }
  ASSERT_GE(j, 0);
  EXPECT_LT((q.q[j] - Vec2(1, 1)).norm(), 1e-14);
  EXPECT_LT((f.f[j] - Vec2(1, 1)).norm(), 1e-14);
  for (const auto& x : f.f3) EXPECT_NEAR(nrm[4].dot(x - m.position(4)), 1.0, 1e-12);
}

TEST(DualFace, FlatMeshIsSingular) {
  TriMesh m = gen_paraboloid_mesh(Mat2::Zero(), GridSpec{5, 0.1});
  std::vector<Vec3> nrm(m.num_vertices(), Vec3::UnitZ());
  EXPECT_EQ(code_of([&] { dual_face(m, nrm, 12); }), ErrorCode::SingularSystem);
  EXPECT_EQ(code_of([&] { dual_face(m, nrm, 0); }), ErrorCode::BoundaryVertex);
}

TEST(NormalImage, VerticalFaceIsSingular) {
  TriMesh m = build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 0, 1}}, {{0, 1, 2}});
  EXPECT_EQ(code_of([&] { normal_image(m, 0, Vec3::UnitZ()); }), ErrorCode::SingularSystem);
}

TEST(DualSurface, OctahedronCube) {
  TriMesh m = gen_sphere_mesh(0);
  DualSurface d = build_dual_surface(m, exact_normals(Sphere{1.0}, m));
  EXPECT_EQ(d.vertices.size(), 8u);
  EXPECT_EQ(d.num_defined_faces(), 6);
  EXPECT_EQ(d.edges.size(), 12u);
  for (const auto& v : d.vertices) {
    ASSERT_TRUE(v.defined);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(std::abs(v.q(c)), 1.0, 1e-14);
  }
  for (const auto& f : d.faces) {
    EXPECT_EQ(f.face.q.size(), 4u);
    EXPECT_TRUE(f.convex);
  }
  EXPECT_LT(d.consistency_error, 1e-8);
}

TEST(DualSurface, ParaboloidFacesConvex) {
  TriMesh m = gen_paraboloid_mesh(diag(4, 0.4), GridSpec{});
  DualSurface d = build_dual_surface(m, exact_normals(Paraboloid{diag(4, 0.4)}, m));
  EXPECT_EQ(d.num_defined_faces(), d.num_interior_vertices);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (d.faces[v].status == DualStatus::Defined) {
      EXPECT_TRUE(d.faces[v].convex) << v;
    }
  }
  EXPECT_LT(d.consistency_error, 1e-8);
}

TEST(DualSurface, AnisotropicHasSelfIntersectingFaces) {
  Mat2 h = diag(4, 0.4);
  TriMesh m = gen_paraboloid_mesh(h, GridSpec{}, {}, GridPattern::Anisotropic);
  DualSurface d = build_dual_surface(m, exact_normals(Paraboloid{h}, m));
  int bad = 0;
  for (const auto& f : d.faces) bad += f.status == DualStatus::Defined && !f.simple;
  EXPECT_GT(bad, 0);
}

TEST(DualSurface, DualEdgesMirrorPrimal) {
  TriMesh m = gen_sphere_mesh(1);
  DualSurface d = build_dual_surface(m, exact_normals(Sphere{1.0}, m));
  ASSERT_EQ(static_cast<int>(d.edges.size()), m.num_edges());
  for (const auto& e : d.edges) {
    auto ta = m.triangle(e.face_a), tb = m.triangle(e.face_b);
    int shared = 0;
    for (int a : ta) shared += std::find(tb.begin(), tb.end(), a) != tb.end();
    EXPECT_EQ(shared, 2);
  }
}

TEST(DualVertexImage, HorizontalParaboloidFace) {
  Mat2 h;
  h << 2.0, 0.5, 0.5, 1.0;
  TriMesh m = gen_paraboloid_mesh(h, GridSpec{7, 0.1});
  int k = 0;
  for (int f = 0; f < m.num_faces(); ++f) {
    bool inner = true;
    for (int v : m.triangle(f)) inner = inner && !m.is_boundary_vertex(v);
    if (inner) {
      k = f;
      break;
    }
  }
  const Triangle& t = m.triangle(k);
  Vec3 n = m.face_normal_raw(k);
  Vec2 g(-n.x() / n.z(), -n.y() / n.z());
  TriMesh c = paraboloid_apex_chart(h, h.inverse() * g, m);
  ASSERT_LT(std::abs(c.face_normal(k).z() - 1.0), 1e-14);
  DualSurface d = build_dual_surface(c, exact_normals(Paraboloid{h}, c));
  NormalImagePolygon b = dual_vertex_normal_image(d, c, k);
  for (int j = 0; j < 3; ++j) {
    Vec3 p = c.position(t[j]);
    EXPECT_LT((b.f[j] + h * Vec2(p.x(), p.y())).norm(), 1e-12);
  }
}

TEST(DualVertexImage, OctahedronSimilarToFace) {
  // B_k is G_k scaled by |q_k| = sqrt 3 about the face centre.
  TriMesh m = gen_sphere_mesh(0);
  DualSurface d = build_dual_surface(m, exact_normals(Sphere{1.0}, m));
  for (int k = 0; k < m.num_faces(); ++k) {
    NormalImagePolygon b = dual_vertex_normal_image(d, m, k);
    const Triangle& t = m.triangle(k);
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        double gb = (b.f[i] - b.f[j]).norm();
        double gg = (m.position(t[i]) - m.position(t[j])).norm();
        EXPECT_NEAR(gb / gg, std::sqrt(3.0), 1e-12);
      }
  }
}

TEST(DualVertexImage, UndefinedNeighbor) {
  TriMesh m = paraboloid_cross(diag(1, 1), 0.1);
  DualSurface d = build_dual_surface(m, exact_normals(Paraboloid{diag(1, 1)}, m));
  EXPECT_EQ(code_of([&] { dual_vertex_normal_image(d, m, 0); }), ErrorCode::UndefinedNeighbor);
}

TEST(PolarPlane, Examples) {
  PolarPlane a = polar_plane(Mat2::Identity(), Vec3(1, 0, 0.5));
  EXPECT_NEAR(a.contact_residual(), 0.0, 1e-15);
  for (double x : {-1.0, 0.0, 2.0}) EXPECT_NEAR(a.evaluate(Vec3(x, 3.0, x - 0.5)), 0.0, 1e-15);
  PolarPlane b = polar_plane(Mat2::Identity(), Vec3::Zero());
  EXPECT_NEAR(b.evaluate(Vec3(5, -2, 0)), 0.0, 1e-15);
  PolarPlane c = polar_plane(Mat2::Identity(), Vec3(0, 0, 1));
  EXPECT_NEAR(c.evaluate(Vec3(4, 1, -1)), 0.0, 1e-15);
  EXPECT_GT(c.contact_residual(), 0.5);
}

TEST(Invariants, NormalImageIsMinusHQ) {
  std::mt19937_64 rng(11);
  std::vector<Mat2> hs{diag(4, 0.4), diag(1, -1)};
  for (int i = 0; i < 8; ++i) hs.push_back(random_symmetric(rng));
  for (const Mat2& h : hs) {
    TriMesh m = gen_paraboloid_mesh(h, GridSpec{5, 0.1});
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (m.is_boundary_vertex(v)) continue;
      Vec3 p = m.position(v);
      TriMesh c = paraboloid_apex_chart(h, Vec2(p.x(), p.y()), m);
      auto nrm = exact_normals(Paraboloid{h}, c);
      DualFace q;
      try {
        q = dual_face(c, nrm, v);
      } catch (const Error&) {
        continue;  // rank-deficient H
      }
      NormalImagePolygon f = normal_image(c, v, nrm[v]);
      double scale = 0.0;
      for (const auto& x : f.f) scale = std::max(scale, x.norm());
      for (std::size_t k = 0; k < q.q.size(); ++k) EXPECT_LT((f.f[k] + h * q.q[k]).norm(), 1e-10 * scale);
    }
  }
}

TEST(Invariants, PolarityWithOffsets) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> off(-0.01, 0.01);
  Mat2 h = diag(4, 0.4);
  std::vector<double> offsets(81);
  for (double& o : offsets) o = off(rng);
  TriMesh m = gen_paraboloid_mesh(h, GridSpec{}, offsets);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (m.is_boundary_vertex(v)) continue;
    Vec3 p = m.position(v);
    TriMesh c = paraboloid_apex_chart(h, Vec2(p.x(), p.y()), m);
    Polygon2 q = polar_dual_face(h, c, v);
    NormalImagePolygon f = normal_image(c, v, Vec3::UnitZ());
    for (std::size_t k = 0; k < q.size(); ++k)
      EXPECT_LT((f.f[k] + h * q[k]).norm(), 1e-10 * std::max(1.0, f.f[k].norm()));
  }
}

TEST(Invariants, SphereDualFaceEqualsNormalImage) {
  for (int level = 0; level <= 2; ++level) {
    TriMesh m = gen_sphere_mesh(level);
    auto nrm = exact_normals(Sphere{1.0}, m);
    for (int v = 0; v < m.num_vertices(); ++v) {
      DualFace q = dual_face(m, nrm, v);
      NormalImagePolygon f = normal_image(m, v, nrm[v]);
      for (std::size_t k = 0; k < q.q.size(); ++k) EXPECT_LT((q.q[k] - f.f[k]).norm(), 1e-10);
    }
  }
}
