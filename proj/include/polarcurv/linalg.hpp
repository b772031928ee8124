#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <optional>
#include <utility>

#include "polarcurv/error.hpp"

namespace polarcurv {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Relative singularity cutoff for 3x3 systems: |det| < kSingularRel * prod(row norms).
inline constexpr double kSingularRel = 1e-12;

/// Solution of a 3x3 system together with its scale-free conditioning data.
struct Solve3Result {
  Vec3 x;
  double det = 0.0;
  double row_norm_product = 0.0;
  double residual = 0.0;  // max |A x - b|
};

/// Gaussian elimination with partial pivoting. Returns nullopt when
/// |det| < kSingularRel * (product of row norms).
inline std::optional<Solve3Result> try_solve3(const Mat3& a, const Vec3& b) {
  double norm_product = a.row(0).norm() * a.row(1).norm() * a.row(2).norm();
  if (!(norm_product > 0.0) || !std::isfinite(norm_product)) return std::nullopt;

  Mat3 m = a;
  Vec3 r = b;
  double det = 1.0;
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 3; ++row) {
      if (std::abs(m(row, col)) > std::abs(m(pivot, col))) pivot = row;
    }
    if (pivot != col) {
      m.row(pivot).swap(m.row(col));
      std::swap(r(pivot), r(col));
      det = -det;
    }
    double p = m(col, col);
    det *= p;
    if (p == 0.0) return std::nullopt;
    for (int row = col + 1; row < 3; ++row) {
      double factor = m(row, col) / p;
      m.row(row) -= factor * m.row(col);
      r(row) -= factor * r(col);
    }
  }
  if (std::abs(det) < kSingularRel * norm_product) return std::nullopt;

  Vec3 x;
  for (int row = 2; row >= 0; --row) {
    double s = r(row);
    for (int c = row + 1; c < 3; ++c) s -= m(row, c) * x(c);
    x(row) = s / m(row, row);
  }
  Solve3Result out;
  out.x = x;
  out.det = det;
  out.row_norm_product = norm_product;
  out.residual = (a * x - b).cwiseAbs().maxCoeff();
  return out;
}

inline Solve3Result solve3(const Mat3& a, const Vec3& b) {
  auto s = try_solve3(a, b);
  if (!s) throw Error(ErrorCode::SingularSystem, "3x3 system below singularity cutoff");
  return *s;
}

/// Plane {x : normal . x = offset}.
struct Plane {
  Vec3 normal;
  double offset = 0.0;
};

inline std::optional<Solve3Result> try_intersect_planes(const std::array<Plane, 3>& planes) {
  Mat3 a;
  Vec3 b;
  for (int i = 0; i < 3; ++i) {
    a.row(i) = planes[i].normal.transpose();
    b(i) = planes[i].offset;
  }
  return try_solve3(a, b);
}

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Jacobian of the affine map taking triangle (a, b, c) onto (a2, b2, c2).
inline std::optional<Mat2> affine_jacobian(const Vec2& a, const Vec2& b, const Vec2& c,
                                           const Vec2& a2, const Vec2& b2, const Vec2& c2) {
  Mat2 src;
  src.col(0) = b - a;
  src.col(1) = c - a;
  Mat2 dst;
  dst.col(0) = b2 - a2;
  dst.col(1) = c2 - a2;
  double d = src.determinant();
  double scale = src.col(0).norm() * src.col(1).norm();
  if (!(scale > 0.0) || std::abs(d) <= 1e-14 * scale) return std::nullopt;
  return Mat2(dst * src.inverse());
}

/// Deterministic tangent basis: e1 is the normalized projection of the x1 axis onto
/// the plane orthogonal to `normal`, falling back to the x2 axis when that projection
/// is shorter than 1e-8. e2 = normal x e1.
inline std::pair<Vec3, Vec3> tangent_basis(const Vec3& normal) {
  Vec3 e1 = Vec3::UnitX() - normal.x() * normal;
  if (e1.norm() < 1e-8) e1 = Vec3::UnitY() - normal.y() * normal;
  e1.normalize();
  Vec3 e2 = normal.cross(e1);
  e2.normalize();
  return {e1, e2};
}

/// Minimal rotation taking unit vector `from` onto unit vector `to`; it fixes the
/// line orthogonal to both (the intersection direction of the two planes).
inline Mat3 rotation_between(const Vec3& from, const Vec3& to) {
  Vec3 axis = from.cross(to);
  double s = axis.norm();
  double c = from.dot(to);
  if (s < 1e-15) {
    if (c > 0.0) return Mat3::Identity();
    // Half turn about any axis orthogonal to `from`.
    Vec3 ortho = tangent_basis(from).first;
    return 2.0 * ortho * ortho.transpose() - Mat3::Identity();
  }
  axis /= s;
  double angle = std::atan2(s, c);
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

inline bool all_finite(const Mat2& m) { return m.allFinite(); }

}  // namespace polarcurv
