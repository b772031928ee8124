#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "polarcurv/curvature.hpp"
#include "polarcurv/generators.hpp"
#include "polarcurv/surfaces.hpp"

using namespace polarcurv;

namespace {

Mat2 diag(double a, double b) {
  Mat2 m;
  m << a, 0, 0, b;
  return m;
}

// -(d nu) in the ground-truth basis by central differences along the surface.
Mat2 fd_shape_operator(const ReferenceSurface& s, const GroundTruth& g, double step) {
  auto project = [&](Vec3 x) {
    // Pull a nearby point back onto the surface along the normal (two Newton steps).
    for (int it = 0; it < 3; ++it) {
      double r = std::visit(
          [&](const auto& surf) -> double {
            using T = std::decay_t<decltype(surf)>;
            if constexpr (std::is_same_v<T, Paraboloid>) {
              Vec2 q(x.x(), x.y());
              return x.z() - 0.5 * q.dot(surf.H * q);
            } else if constexpr (std::is_same_v<T, Sphere>) {
              return x.norm() - surf.R;
            } else if constexpr (std::is_same_v<T, Cylinder>) {
              return std::hypot(x.x(), x.y()) - surf.R;
            } else {
              return x.z() - surf.value(x.x(), x.y());
            }
          },
          s);
      Vec3 n = reference_normal(s, x);
      double scale = std::holds_alternative<Sphere>(s) || std::holds_alternative<Cylinder>(s) ? 1.0 : n.z();
      x -= r * scale * n;
    }
    return x;
  };
  Mat2 j;
  Vec3 basis[2] = {g.e1, g.e2};
  for (int c = 0; c < 2; ++c) {
    Vec3 xp = project(g.point + step * basis[c]);
    Vec3 xm = project(g.point - step * basis[c]);
    Vec3 dn = (reference_normal(s, xp) - reference_normal(s, xm)) / (2.0 * step);
    j(0, c) = g.e1.dot(dn);
    j(1, c) = g.e2.dot(dn);
  }
  return -j;
}

}  // namespace

TEST(GroundTruth, ParaboloidApex) {
  GroundTruth g = ground_truth(Paraboloid{diag(4, 0.4)}, Vec3::Zero());
  EXPECT_LT((g.A - diag(4, 0.4)).norm(), 1e-15);
  EXPECT_EQ(g.normal, Vec3::UnitZ());
  EXPECT_EQ(g.e1, Vec3::UnitX());
  EXPECT_EQ(g.e2, Vec3::UnitY());
}

TEST(GroundTruth, SphereAndCylinder) {
  GroundTruth s = ground_truth(Sphere{1.0}, Vec3::UnitZ());
  EXPECT_LT((s.A + Mat2::Identity()).norm(), 1e-15);
  GroundTruth c = ground_truth(Cylinder{2.0}, Vec3(2, 0, 0));
  // e1 falls back to the x2 axis (circumferential), e2 = nu x e1 is axial
  EXPECT_LT((c.A - diag(-0.5, 0.0)).norm(), 1e-15);
  EXPECT_NEAR(std::abs(c.e2.z()), 1.0, 1e-15);
}

TEST(GroundTruth, OffSurfaceThrows) {
  try {
    ground_truth(Sphere{1.0}, Vec3(0, 0, 1.1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PointOffSurface);
  }
}

TEST(GroundTruth, MatchesFiniteDifferenceJacobian) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat2 h;
  h << 1.3, -0.4, -0.4, -0.7;
  Graph quad{GraphKind::QuadraticCubic, h, 0.3};
  Graph sinsin{GraphKind::SinSin, Mat2::Zero(), 0.0};
  std::vector<ReferenceSurface> surfaces{Paraboloid{h}, Sphere{1.5}, Cylinder{0.8}, quad, sinsin};
  for (const auto& s : surfaces) {
    for (int i = 0; i < 100; ++i) {
      Vec3 p;
      if (std::holds_alternative<Sphere>(s)) {
        p = Vec3(u(rng), u(rng), u(rng)).normalized() * 1.5;
      } else if (std::holds_alternative<Cylinder>(s)) {
        double t = std::numbers::pi * u(rng);
        p = Vec3(0.8 * std::cos(t), 0.8 * std::sin(t), u(rng));
      } else {
        double x = u(rng), y = u(rng);
        double z = std::visit(
            [&](const auto& surf) -> double {
              using T = std::decay_t<decltype(surf)>;
              if constexpr (std::is_same_v<T, Paraboloid>) return 0.5 * Vec2(x, y).dot(surf.H * Vec2(x, y));
              else if constexpr (std::is_same_v<T, Graph>) return surf.value(x, y);
              else return 0.0;
            },
            s);
        p = Vec3(x, y, z);
      }
      GroundTruth g = ground_truth(s, p);
      EXPECT_NEAR(g.normal.norm(), 1.0, 1e-14);
      EXPECT_NEAR(g.e1.cross(g.e2).dot(g.normal), 1.0, 1e-14);
      Mat2 fd = fd_shape_operator(s, g, 1e-5);
      EXPECT_LT((fd - g.A).norm(), 1e-6 * std::max(1.0, g.A.norm())) << surface_name(s) << " at " << p.transpose();
      EXPECT_LT((g.A - g.A.transpose()).norm(), 1e-12);
    }
  }
}

TEST(Graph, GradientMatchesFiniteDifferences) {
  Mat2 h;
  h << 0.9, 0.2, 0.2, -0.3;
  for (Graph g : {Graph{GraphKind::QuadraticCubic, h, 0.5}, Graph{GraphKind::SinSin, Mat2::Zero(), 0.0}}) {
    for (double x : {-0.7, 0.1, 0.9})
      for (double y : {-0.4, 0.3, 1.1}) {
        const double e = 1e-6;
        Vec2 fd((g.value(x + e, y) - g.value(x - e, y)) / (2 * e), (g.value(x, y + e) - g.value(x, y - e)) / (2 * e));
        EXPECT_LT((fd - g.gradient(x, y)).norm(), 1e-6 * std::max(1.0, fd.norm()));
        Mat2 hs = g.hessian(x, y);
        EXPECT_DOUBLE_EQ(hs(0, 1), hs(1, 0));
      }
  }
}

TEST(Generators, ParaboloidOnSurface) {
  Mat2 h = diag(4, 0.4);
  TriMesh m = gen_paraboloid_mesh(h, GridSpec{5, 0.1});
  EXPECT_EQ(m.num_vertices(), 25);
  for (const auto& p : m.positions()) EXPECT_NEAR(p.z(), 2 * p.x() * p.x() + 0.2 * p.y() * p.y(), 1e-15);
}

TEST(Generators, FlatAndSaddleParaboloid) {
  TriMesh flat = gen_paraboloid_mesh(Mat2::Zero(), GridSpec{5, 0.2});
  for (const auto& p : flat.positions()) EXPECT_EQ(p.z(), 0.0);
  TriMesh saddle = gen_paraboloid_mesh(diag(1, -1), GridSpec{7, 0.1});
  for (int v = 0; v < saddle.num_vertices(); ++v)
    if (!saddle.is_boundary_vertex(v)) {
      EXPECT_LT(angle_defect(saddle, v), 0.0);
    }
}

TEST(Generators, ParaboloidOffsetsAndErrors) {
  std::vector<double> off(25, 0.01);
  TriMesh m = gen_paraboloid_mesh(diag(1, 1), GridSpec{5, 0.1}, off);
  for (const auto& p : m.positions()) EXPECT_NEAR(p.z(), 0.5 * (p.x() * p.x() + p.y() * p.y()) + 0.01, 1e-15);
  EXPECT_THROW(gen_paraboloid_mesh(diag(1, 1), GridSpec{5, 0.0}), Error);
  EXPECT_THROW(gen_paraboloid_mesh(diag(1, 1), GridSpec{5, 0.1}, std::vector<double>(3, 0.0)), Error);
}

TEST(Generators, SphereLevels) {
  EXPECT_EQ(gen_sphere_mesh(0).num_vertices(), 6);
  TriMesh l1 = gen_sphere_mesh(1);
  EXPECT_EQ(l1.num_vertices(), 18);
  for (const auto& p : l1.positions()) EXPECT_NEAR(p.norm(), 1.0, 1e-12);
  EXPECT_EQ(gen_sphere_mesh(2).euler_characteristic(), 2);
}

TEST(Generators, LanternCountsAndArea) {
  TriMesh m = gen_schwarz_lantern(1, 1, 8, 4);
  EXPECT_EQ(m.num_vertices(), 40);
  EXPECT_EQ(m.num_faces(), 64);
  EXPECT_NEAR(m.total_area(), oracle::kLantern1184Area, 1e-12);
  EXPECT_NEAR(lantern_area_closed_form(1, 1, 8, 4), oracle::kLantern1184Area, 1e-12);
  for (const auto& p : m.positions()) EXPECT_NEAR(std::hypot(p.x(), p.y()), 1.0, 1e-12);
  double first = m.face_area(0);
  for (int f = 1; f < m.num_faces(); ++f) EXPECT_NEAR(m.face_area(f), first, 1e-14);
  EXPECT_THROW(gen_schwarz_lantern(1, 1, 2, 4), Error);
  EXPECT_THROW(lantern_area_closed_form(1, 1, 8, 0), Error);
}

TEST(Generators, LanternClosedFormLimits) {
  EXPECT_NEAR(lantern_area_closed_form(1, 1, 64, 64 * 64), oracle::kLanternClosedN64, 1e-9);
  EXPECT_LT(std::abs(lantern_area_closed_form(1, 1, 64, 64 * 64) / oracle::kLanternLimitQ1 - 1.0), 0.01);
  EXPECT_LT(std::abs(lantern_area_closed_form(1, 1, 512, 4) / oracle::kCylinderArea - 1.0), 1e-5);
}

TEST(Generators, CubeCentroid) {
  TriMesh m = gen_cube_centroid();
  EXPECT_EQ(m.num_vertices(), 14);
  EXPECT_EQ(m.num_faces(), 24);
  EXPECT_TRUE(m.is_closed());
  for (int v = 0; v < 8; ++v) EXPECT_NEAR(angle_defect(m, v), std::numbers::pi / 2, 1e-14);
  for (int v = 8; v < 14; ++v) EXPECT_NEAR(angle_defect(m, v), 0.0, 1e-14);
}

TEST(Generators, GraphMeshes) {
  Graph zero{GraphKind::QuadraticCubic, Mat2::Zero(), 0.0};
  TriMesh flat = gen_graph_mesh(zero, Domain{0, 1, 0, 1}, 0.1);
  for (const auto& p : flat.positions()) EXPECT_EQ(p.z(), 0.0);
  Graph par{GraphKind::QuadraticCubic, diag(4, 0.4), 0.0};
  TriMesh pm = gen_graph_mesh(par, Domain{-0.5, 0.5, -0.5, 0.5}, 0.1);
  for (const auto& p : pm.positions()) EXPECT_NEAR(p.z(), 2 * p.x() * p.x() + 0.2 * p.y() * p.y(), 1e-15);
  Graph sinsin{GraphKind::SinSin, Mat2::Zero(), 0.0};
  TriMesh sm = gen_graph_mesh(sinsin, Domain{0.3, 1.2, 0.3, 1.2}, 0.05);
  double lo = 1e300, hi = 0.0;
  for (int e = 0; e < sm.num_edges(); ++e) {
    lo = std::min(lo, sm.edge_length(e));
    hi = std::max(hi, sm.edge_length(e));
  }
  EXPECT_LE(hi, 0.05 * (1 + 1e-12));
  EXPECT_GE(lo / hi, 0.4);
  EXPECT_THROW(gen_graph_mesh(sinsin, Domain{1, 0, 0, 1}, 0.1), Error);
}

TEST(Generators, ApexChartKeepsHeightsAboveParaboloid) {
  Mat2 h;
  h << 1.2, 0.3, 0.3, -0.8;
  Vec2 a(0.2, -0.1);
  TriMesh m = gen_paraboloid_mesh(h, GridSpec{5, 0.1});
  TriMesh c = paraboloid_apex_chart(h, a, m);
  for (int v = 0; v < m.num_vertices(); ++v) {
    Vec3 p = c.position(v);
    EXPECT_NEAR(p.z(), 0.5 * Vec2(p.x(), p.y()).dot(h * Vec2(p.x(), p.y())), 1e-15);
  }
}
