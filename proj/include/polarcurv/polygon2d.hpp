#pragma once

// Planar polygon predicates and constructions shared by the curvature and
// correspondence modules. All tests use one relative tolerance (kGeomRel) scaled
// by the polygon diameter; there is no exact arithmetic.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "polarcurv/linalg.hpp"

namespace polarcurv {

using Polygon2 = std::vector<Vec2>;

inline constexpr double kGeomRel = 1e-12;

inline double orient2(const Vec2& a, const Vec2& b, const Vec2& c) { return cross2(b - a, c - a); }

inline double signed_area(const Polygon2& poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) s += cross2(poly[i], poly[(i + 1) % n]);
  return 0.5 * s;
}

inline double diameter(const Polygon2& poly) {
  double d = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (std::size_t j = i + 1; j < poly.size(); ++j) d = std::max(d, (poly[i] - poly[j]).norm());
  return d;
}

/// Drops consecutive vertices closer than `tol` (cyclically).
inline Polygon2 dedupe_consecutive(const Polygon2& poly, double tol) {
  Polygon2 out;
  for (const auto& p : poly) {
    if (out.empty() || (p - out.back()).norm() > tol) out.push_back(p);
  }
  while (out.size() > 1 && (out.front() - out.back()).norm() <= tol) out.pop_back();
  return out;
}

enum class SegmentRelation { Disjoint, Point, Overlap };

struct SegmentHit {
  SegmentRelation relation = SegmentRelation::Disjoint;
  double t = 0.0;  // parameter along the first segment
  double u = 0.0;  // parameter along the second segment
  Vec2 point = Vec2::Zero();
};

/// Intersection of segments [a,b] and [c,d]. `tol` is an absolute length tolerance.
inline SegmentHit intersect_segments(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d,
                                     double tol) {
  SegmentHit hit;
  Vec2 r = b - a;
  Vec2 s = d - c;
  double denom = cross2(r, s);
  double rl = r.norm();
  double sl = s.norm();
  if (rl <= tol || sl <= tol) return hit;
  if (std::abs(denom) <= tol * std::max(rl, sl)) {
    // Parallel: check collinear overlap.
    double dist = std::abs(cross2(r, c - a)) / rl;
    if (dist > tol) return hit;
    double t0 = (c - a).dot(r) / (rl * rl);
    double t1 = (d - a).dot(r) / (rl * rl);
    double lo = std::max(0.0, std::min(t0, t1));
    double hi = std::min(1.0, std::max(t0, t1));
    double overlap_len = (hi - lo) * rl;
    if (overlap_len > tol) {
      hit.relation = SegmentRelation::Overlap;
      hit.t = lo;
      hit.point = a + lo * r;
      return hit;
    }
    if (overlap_len >= -tol) {
      hit.relation = SegmentRelation::Point;
      hit.t = std::clamp(lo, 0.0, 1.0);
      hit.point = a + hit.t * r;
      hit.u = std::clamp((hit.point - c).dot(s) / (sl * sl), 0.0, 1.0);
    }
    return hit;
  }
  double t = cross2(c - a, s) / denom;
  double u = cross2(c - a, r) / denom;
  double tt = tol / rl;
  double ut = tol / sl;
  if (t < -tt || t > 1.0 + tt || u < -ut || u > 1.0 + ut) return hit;
  hit.relation = SegmentRelation::Point;
  hit.t = std::clamp(t, 0.0, 1.0);
  hit.u = std::clamp(u, 0.0, 1.0);
  hit.point = a + hit.t * r;
  return hit;
}

/// Number of boundary self-intersections of a closed polyline: intersecting pairs of
/// non-adjacent edges plus overlapping adjacent edges.
inline int count_self_intersections(const Polygon2& poly, double tol) {
  const int n = static_cast<int>(poly.size());
  int count = 0;
  for (int i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    for (int j = i + 1; j < n; ++j) {
      const Vec2& c = poly[j];
      const Vec2& d = poly[(j + 1) % n];
      bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      SegmentHit hit = intersect_segments(a, b, c, d, tol);
      if (adjacent) {
        if (hit.relation == SegmentRelation::Overlap) ++count;
        continue;
      }
      if (hit.relation != SegmentRelation::Disjoint) ++count;
    }
  }
  return count;
}

/// Simple closed polygon: at least 3 vertices, no zero-length edge, no boundary
/// self-intersection, nonzero area.
inline bool is_simple(const Polygon2& poly) {
  if (poly.size() < 3) return false;
  double diam = diameter(poly);
  if (!(diam > 0.0)) return false;
  double tol = 1e-10 * diam;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if ((poly[i] - poly[(i + 1) % poly.size()]).norm() <= tol) return false;
  }
  if (std::abs(signed_area(poly)) <= kGeomRel * diam * diam) return false;
  return count_self_intersections(poly, tol) == 0;
}

inline bool is_convex(const Polygon2& poly) {
  const std::size_t n = poly.size();
  if (n < 3 || !is_simple(poly)) return false;
  double diam = diameter(poly);
  double sign = signed_area(poly) > 0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sign * orient2(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]) < -kGeomRel * diam * diam)
      return false;
  }
  return true;
}

/// Winding number of a closed polyline about `p` (0 when p is on the boundary within tol).
inline int winding_number(const Polygon2& poly, const Vec2& p) {
  int wn = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && orient2(a, b, p) > 0) ++wn;
    } else {
      if (b.y() <= p.y() && orient2(a, b, p) < 0) --wn;
    }
  }
  return wn;
}

inline double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double l2 = ab.squaredNorm();
  if (l2 == 0.0) return (p - a).norm();
  double t = std::clamp((p - a).dot(ab) / l2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

inline double distance_to_boundary(const Polygon2& poly, const Vec2& p) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i)
    d = std::min(d, distance_to_segment(p, poly[i], poly[(i + 1) % poly.size()]));
  return d;
}

/// Strict containment: nonzero winding and farther than tol from the boundary.
inline bool contains_strictly(const Polygon2& poly, const Vec2& p, double tol) {
  return winding_number(poly, p) != 0 && distance_to_boundary(poly, p) > tol;
}

/// Andrew monotone chain; counterclockwise, collinear points dropped.
inline Polygon2 convex_hull(Polygon2 pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a == b; }),
            pts.end());
  if (pts.size() < 3) return pts;
  Polygon2 hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && orient2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && orient2(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

inline Polygon2 make_ccw(Polygon2 poly) {
  if (signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  return poly;
}

/// Sutherland-Hodgman clip of `subject` against a convex `clipper` (either orientation).
inline Polygon2 clip_convex(const Polygon2& subject, const Polygon2& clipper) {
  Polygon2 clip = make_ccw(clipper);
  Polygon2 out = subject;
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !out.empty(); ++e) {
    const Vec2& c0 = clip[e];
    const Vec2& c1 = clip[(e + 1) % m];
    Polygon2 in;
    in.swap(out);
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& p = in[i];
      const Vec2& q = in[(i + 1) % n];
      double sp = orient2(c0, c1, p);
      double sq = orient2(c0, c1, q);
      if (sp >= 0) out.push_back(p);
      if ((sp >= 0) != (sq >= 0)) {
        double t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  return out;
}

/// Twice the signed areas of the fan triangles (star, v_k, v_{k+1}).
inline std::vector<double> fan_orientations(const Polygon2& poly, const Vec2& star) {
  std::vector<double> out(poly.size());
  for (std::size_t k = 0; k < poly.size(); ++k)
    out[k] = orient2(star, poly[k], poly[(k + 1) % poly.size()]);
  return out;
}

/// Star-shaped with respect to `star`: every fan triangle has the same strict
/// orientation (margin kGeomRel * diam^2) and the fan winds exactly once.
inline bool is_star_shaped_about(const Polygon2& poly, const Vec2& star) {
  if (poly.size() < 3) return false;
  double diam = std::max(diameter(poly), distance_to_boundary(poly, star));
  if (!(diam > 0.0)) return false;
  double margin = kGeomRel * diam * diam;
  auto fan = fan_orientations(poly, star);
  bool pos = fan[0] > 0;
  double total_angle = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    if (std::abs(fan[k]) <= margin || (fan[k] > 0) != pos) return false;
    Vec2 a = poly[k] - star;
    Vec2 b = poly[(k + 1) % poly.size()] - star;
    total_angle += std::atan2(cross2(a, b), a.dot(b));
  }
  return std::abs(std::abs(total_angle) - 2.0 * std::numbers::pi) < 1e-6;
}

/// Point of the polygon kernel maximizing the minimum signed distance to the edge
/// lines (equivalently the minimum fan-triangle height). Found by scanning every
/// triple of edge lines for its equidistant point; returns the best point and its
/// clearance, or nullopt if no candidate has positive clearance.
struct KernelPoint {
  Vec2 point;
  double clearance;
};

inline std::optional<KernelPoint> chebyshev_kernel_point(const Polygon2& poly) {
  const int n = static_cast<int>(poly.size());
  if (n < 3) return std::nullopt;
  double sign = signed_area(poly) >= 0 ? 1.0 : -1.0;
  // Unit inward normals and offsets: dist_e(x) = nrm_e . x - off_e.
  std::vector<Vec2> nrm(n);
  std::vector<double> off(n);
  std::vector<bool> usable(n, true);
  for (int e = 0; e < n; ++e) {
    Vec2 d = poly[(e + 1) % n] - poly[e];
    double l = d.norm();
    if (l == 0.0) {
      usable[e] = false;
      continue;
    }
    nrm[e] = sign * Vec2(-d.y(), d.x()) / l;
    off[e] = nrm[e].dot(poly[e]);
  }
  auto clearance = [&](const Vec2& x) {
    double c = std::numeric_limits<double>::infinity();
    for (int e = 0; e < n; ++e)
      if (usable[e]) c = std::min(c, nrm[e].dot(x) - off[e]);
    return c;
  };
  std::optional<KernelPoint> best;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c) {
        if (!usable[a] || !usable[b] || !usable[c]) continue;
        Mat3 m;
        m << nrm[a].x(), nrm[a].y(), -1.0, nrm[b].x(), nrm[b].y(), -1.0, nrm[c].x(), nrm[c].y(), -1.0;
        Vec3 rhs(off[a], off[b], off[c]);
        auto s = try_solve3(m, rhs);
        if (!s) continue;
        Vec2 x(s->x(0), s->x(1));
        double cl = clearance(x);
        if (!best || cl > best->clearance) best = KernelPoint{x, cl};
      }
  if (!best || !(best->clearance > 0.0)) return std::nullopt;
  return best;
}

/// Ear clipping of a simple polygon into index triangles with the polygon's orientation.
inline std::optional<std::vector<std::array<int, 3>>> ear_clip(const Polygon2& poly) {
  const int n = static_cast<int>(poly.size());
  if (n < 3) return std::nullopt;
  double sign = signed_area(poly) >= 0 ? 1.0 : -1.0;
  double diam = diameter(poly);
  double margin = kGeomRel * diam * diam;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::vector<std::array<int, 3>> tris;
  int guard = 0;
  while (idx.size() > 3 && guard < 4 * n * n) {
    ++guard;
    bool clipped = false;
    const int m = static_cast<int>(idx.size());
    for (int k = 0; k < m; ++k) {
      int ia = idx[(k + m - 1) % m];
      int ib = idx[k];
      int ic = idx[(k + 1) % m];
      if (sign * orient2(poly[ia], poly[ib], poly[ic]) <= margin) continue;
      bool empty = true;
      for (int j : idx) {
        if (j == ia || j == ib || j == ic) continue;
        const Vec2& p = poly[j];
        if (sign * orient2(poly[ia], poly[ib], p) >= -margin &&
            sign * orient2(poly[ib], poly[ic], p) >= -margin &&
            sign * orient2(poly[ic], poly[ia], p) >= -margin) {
          empty = false;
          break;
        }
      }
      if (!empty) continue;
      tris.push_back({ia, ib, ic});
      idx.erase(idx.begin() + k);
      clipped = true;
      break;
    }
    if (!clipped) return std::nullopt;
  }
  if (idx.size() != 3) return std::nullopt;
  tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

/// Least-squares affine fit  dst_k ~ L src_k + t.
inline std::optional<std::pair<Mat2, Vec2>> fit_affine(const Polygon2& src, const Polygon2& dst) {
  const std::size_t n = src.size();
  if (n < 3 || dst.size() != n) return std::nullopt;
  Eigen::MatrixXd a(n, 3);
  Eigen::MatrixXd b(n, 2);
  for (std::size_t k = 0; k < n; ++k) {
    a(k, 0) = src[k].x();
    a(k, 1) = src[k].y();
    a(k, 2) = 1.0;
    b(k, 0) = dst[k].x();
    b(k, 1) = dst[k].y();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 3) return std::nullopt;
  Eigen::MatrixXd x = qr.solve(b);
  Mat2 l;
  l << x(0, 0), x(1, 0), x(0, 1), x(1, 1);
  return std::make_pair(l, Vec2(x(2, 0), x(2, 1)));
}

}  // namespace polarcurv
