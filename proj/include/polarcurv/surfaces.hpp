#pragma once

// Analytic reference surfaces. Sign convention shared by every module:
//   A := -(Jacobian of the Gauss map) in the tangent basis (e1, e2),
// so a paraboloid x3 = 1/2 p^T H p has A = H at its apex and the unit sphere
// (outward normals) has A = -I.

#include <cmath>
#include <string>
#include <variant>

#include "polarcurv/error.hpp"
#include "polarcurv/linalg.hpp"

namespace polarcurv {

/// x3 = 1/2 p^T H p.
struct Paraboloid {
  Mat2 H = Mat2::Zero();
};

/// |x| = R, outward normals.
struct Sphere {
  double R = 1.0;
};

/// x1^2 + x2^2 = R^2, axis x3, outward normals.
struct Cylinder {
  double R = 1.0;
};

/// Built-in graph surfaces x3 = f(x1, x2).
enum class GraphKind {
  QuadraticCubic,  // 1/2 p^T H p + c (x1^3 + x2^3)
  SinSin,          // sin x1 * sin x2
};

struct Graph {
  GraphKind kind = GraphKind::SinSin;
  Mat2 H = Mat2::Zero();
  double cubic = 0.0;

  double value(double x, double y) const {
    switch (kind) {
      case GraphKind::QuadraticCubic:
        return 0.5 * (H(0, 0) * x * x + 2.0 * H(0, 1) * x * y + H(1, 1) * y * y) + cubic * (x * x * x + y * y * y);
      case GraphKind::SinSin:
        return std::sin(x) * std::sin(y);
    }
    return 0.0;
  }
  Vec2 gradient(double x, double y) const {
    switch (kind) {
      case GraphKind::QuadraticCubic:
        return Vec2(H(0, 0) * x + H(0, 1) * y + 3.0 * cubic * x * x, H(0, 1) * x + H(1, 1) * y + 3.0 * cubic * y * y);
      case GraphKind::SinSin:
        return Vec2(std::cos(x) * std::sin(y), std::sin(x) * std::cos(y));
    }
    return Vec2::Zero();
  }
  Mat2 hessian(double x, double y) const {
    Mat2 h;
    switch (kind) {
      case GraphKind::QuadraticCubic:
        h << H(0, 0) + 6.0 * cubic * x, H(0, 1), H(0, 1), H(1, 1) + 6.0 * cubic * y;
        return h;
      case GraphKind::SinSin: {
        double ss = std::sin(x) * std::sin(y);
        double cc = std::cos(x) * std::cos(y);
        h << -ss, cc, cc, -ss;
        return h;
      }
    }
    return Mat2::Zero();
  }
};

using ReferenceSurface = std::variant<Paraboloid, Sphere, Cylinder, Graph>;

struct GroundTruth {
  Vec3 point;
  Vec3 normal;
  Vec3 e1;
  Vec3 e2;
  Mat2 A;  // shape operator in (e1, e2)
};

namespace detail {

inline GroundTruth graph_ground_truth(const Vec3& p, const Vec2& grad, const Mat2& hess) {
  // X(x, y) = (x, y, f); n = (-f_x, -f_y, 1); nu = n / |n|.
  Vec3 n(-grad.x(), -grad.y(), 1.0);
  double w = n.norm();
  GroundTruth g;
  g.point = p;
  g.normal = n / w;
  auto [e1, e2] = tangent_basis(g.normal);
  g.e1 = e1;
  g.e2 = e2;
  Eigen::Matrix<double, 3, 2> jx;  // dX / d(x, y)
  jx << 1.0, 0.0, 0.0, 1.0, grad.x(), grad.y();
  Eigen::Matrix<double, 3, 2> jn;  // dn / d(x, y)
  jn << -hess(0, 0), -hess(0, 1), -hess(1, 0), -hess(1, 1), 0.0, 0.0;
  Eigen::Matrix<double, 3, 2> jnu = (jn - g.normal * (g.normal.transpose() * jn)) / w;
  // Tangent vector t -> dnu(t) = jnu * G^{-1} * jx^T t.
  Mat2 metric = jx.transpose() * jx;
  Eigen::Matrix<double, 3, 2> basis;
  basis.col(0) = e1;
  basis.col(1) = e2;
  Mat2 gauss = basis.transpose() * jnu * metric.inverse() * jx.transpose() * basis;
  g.A = -gauss;
  return g;
}

inline double surface_residual(const ReferenceSurface& s, const Vec3& p) {
  return std::visit(
      [&](const auto& surf) -> double {
        using T = std::decay_t<decltype(surf)>;
        if constexpr (std::is_same_v<T, Paraboloid>) {
          Vec2 q(p.x(), p.y());
          return p.z() - 0.5 * q.dot(surf.H * q);
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return p.norm() - surf.R;
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          return std::hypot(p.x(), p.y()) - surf.R;
        } else {
          return p.z() - surf.value(p.x(), p.y());
        }
      },
      s);
}

}  // namespace detail

/// Unit normal (outward for sphere/cylinder, +x3 side for graphs) without validation.
inline Vec3 reference_normal(const ReferenceSurface& s, const Vec3& p) {
  return std::visit(
      [&](const auto& surf) -> Vec3 {
        using T = std::decay_t<decltype(surf)>;
        if constexpr (std::is_same_v<T, Paraboloid>) {
          Vec2 g = surf.H * Vec2(p.x(), p.y());
          return Vec3(-g.x(), -g.y(), 1.0).normalized();
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return p.normalized();
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          return Vec3(p.x(), p.y(), 0.0).normalized();
        } else {
          Vec2 g = surf.gradient(p.x(), p.y());
          return Vec3(-g.x(), -g.y(), 1.0).normalized();
        }
      },
      s);
}

inline GroundTruth ground_truth(const ReferenceSurface& s, const Vec3& p) {
  double res = detail::surface_residual(s, p);
  if (!(std::abs(res) <= 1e-9 * std::max(1.0, p.norm())))
    throw Error(ErrorCode::PointOffSurface, "point misses the reference surface by " + std::to_string(res));
  return std::visit(
      [&](const auto& surf) -> GroundTruth {
        using T = std::decay_t<decltype(surf)>;
        if constexpr (std::is_same_v<T, Paraboloid>) {
          return detail::graph_ground_truth(p, surf.H * Vec2(p.x(), p.y()), surf.H);
        } else if constexpr (std::is_same_v<T, Graph>) {
          return detail::graph_ground_truth(p, surf.gradient(p.x(), p.y()), surf.hessian(p.x(), p.y()));
        } else if constexpr (std::is_same_v<T, Sphere>) {
          GroundTruth g;
          g.point = p;
          g.normal = p.normalized();
          std::tie(g.e1, g.e2) = tangent_basis(g.normal);
          g.A = -Mat2::Identity() / surf.R;
          return g;
        } else {
          GroundTruth g;
          g.point = p;
          g.normal = Vec3(p.x(), p.y(), 0.0).normalized();
          std::tie(g.e1, g.e2) = tangent_basis(g.normal);
          // dnu(t) = (t1, t2, 0) / R on tangent vectors.
          Mat3 proj = Mat3::Zero();
          proj(0, 0) = proj(1, 1) = 1.0 / surf.R;
          Eigen::Matrix<double, 3, 2> basis;
          basis.col(0) = g.e1;
          basis.col(1) = g.e2;
          g.A = -(basis.transpose() * proj * basis);
          return g;
        }
      },
      s);
}

inline std::string surface_name(const ReferenceSurface& s) {
  return std::visit(
      [](const auto& surf) -> std::string {
        using T = std::decay_t<decltype(surf)>;
        if constexpr (std::is_same_v<T, Paraboloid>) return "paraboloid";
        else if constexpr (std::is_same_v<T, Sphere>) return "sphere";
        else if constexpr (std::is_same_v<T, Cylinder>) return "cylinder";
        else return surf.kind == GraphKind::SinSin ? "graph-sinsin" : "graph-quadratic-cubic";
      },
      s);
}

}  // namespace polarcurv
