#pragma once

// Decomposition of a closed, possibly self-intersecting polyline into simple loops.
// Crossings become nodes, each node is resolved by oriented smoothing (incoming and
// outgoing strands re-paired without crossing), and the resulting cycles are split
// wherever they still touch themselves.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "polarcurv/polygon2d.hpp"

namespace polarcurv {

struct SimpleLoop {
  Polygon2 polygon;
  int sign = 0;  // +1 counterclockwise, -1 clockwise, 0 degenerate
  double area = 0.0;
};

struct LoopDecomposition {
  std::vector<SimpleLoop> loops;
  double signed_sum = 0.0;
  double absolute_sum = 0.0;
};

inline constexpr double kLoopRel = 1e-10;

inline LoopDecomposition decompose_normal_image(const Polygon2& poly) {
  const int n = static_cast<int>(poly.size());
  if (n < 3) throw Error(ErrorCode::TooFewVertices, "closed polyline needs at least 3 vertices");
  for (const auto& p : poly)
    if (!p.allFinite()) throw Error(ErrorCode::NonFinite, "polyline vertex is not finite");
  const double diam = diameter(poly);
  if (!(diam > 0.0)) throw Error(ErrorCode::DegeneratePolyline, "polyline collapses to a point");
  const double tol = kLoopRel * diam;
  for (int i = 0; i < n; ++i)
    if ((poly[(i + 1) % n] - poly[i]).norm() <= tol)
      throw Error(ErrorCode::DegeneratePolyline, "zero-length edge at vertex " + std::to_string(i));

  std::vector<Vec2> nodes;
  auto node_of = [&](const Vec2& p) {
    for (std::size_t j = 0; j < nodes.size(); ++j)
      if ((nodes[j] - p).norm() <= tol) return static_cast<int>(j);
    nodes.push_back(p);
    return static_cast<int>(nodes.size()) - 1;
  };
  std::vector<int> vertex_node(n);
  for (int i = 0; i < n; ++i) vertex_node[i] = node_of(poly[i]);

  std::vector<std::vector<std::pair<double, int>>> on_edge(n);
  for (int i = 0; i < n; ++i) {
    on_edge[i].push_back({0.0, vertex_node[i]});
    on_edge[i].push_back({1.0, vertex_node[(i + 1) % n]});
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec2 &a = poly[i], &b = poly[(i + 1) % n], &c = poly[j], &d = poly[(j + 1) % n];
      SegmentHit hit = intersect_segments(a, b, c, d, tol);
      if (hit.relation == SegmentRelation::Overlap)
        throw Error(ErrorCode::DegeneratePolyline,
                    "edges " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
      bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent || hit.relation != SegmentRelation::Point) continue;
      int id = node_of(hit.point);
      on_edge[i].push_back({hit.t, id});
      on_edge[j].push_back({hit.u, id});
    }
  }

  // Closed walk over nodes.
  std::vector<int> walk;
  for (int i = 0; i < n; ++i) {
    auto& list = on_edge[i];
    std::stable_sort(list.begin(), list.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t s = 0; s + 1 < list.size(); ++s)
      if (walk.empty() || walk.back() != list[s].second) walk.push_back(list[s].second);
  }
  while (walk.size() > 1 && walk.front() == walk.back()) walk.pop_back();
  const int len = static_cast<int>(walk.size());

  LoopDecomposition out;
  if (len < 3) return out;

  // Dart s runs walk[s] -> walk[s+1]. succ[s] is the dart taken after s.
  std::vector<int> succ(len, -1);
  std::vector<std::vector<int>> visits(nodes.size());
  for (int s = 0; s < len; ++s) visits[walk[s]].push_back(s);
  for (std::size_t node = 0; node < nodes.size(); ++node) {
    const auto& vs = visits[node];
    if (vs.empty()) continue;
    if (vs.size() == 1) {
      int s = vs[0];
      succ[(s + len - 1) % len] = s;
      continue;
    }
    struct Ray {
      double angle;
      bool outgoing;
      int dart;
    };
    std::vector<Ray> rays;
    const Vec2& o = nodes[node];
    for (int s : vs) {
      Vec2 out_dir = nodes[walk[(s + 1) % len]] - o;
      Vec2 in_dir = nodes[walk[(s + len - 1) % len]] - o;
      rays.push_back({std::atan2(out_dir.y(), out_dir.x()), true, s});
      rays.push_back({std::atan2(in_dir.y(), in_dir.x()), false, (s + len - 1) % len});
    }
    std::stable_sort(rays.begin(), rays.end(), [](const Ray& x, const Ray& y) { return x.angle < y.angle; });
    // Non-crossing pairing: rotate so the running balance (out = +1, in = -1) never
    // drops below zero, then match like parentheses.
    const int m = static_cast<int>(rays.size());
    int bal = 0, min_bal = 0, start = 0;
    for (int r = 0; r < m; ++r) {
      bal += rays[r].outgoing ? 1 : -1;
      if (bal < min_bal) {
        min_bal = bal;
        start = r + 1;
      }
    }
    std::vector<int> stack;
    for (int r = 0; r < m; ++r) {
      const Ray& ray = rays[(start + r) % m];
      if (ray.outgoing) {
        stack.push_back(ray.dart);
      } else {
        succ[ray.dart] = stack.back();
        stack.pop_back();
      }
    }
  }

  std::vector<bool> used(len, false);
  for (int s0 = 0; s0 < len; ++s0) {
    if (used[s0]) continue;
    std::vector<int> cycle;
    for (int s = s0; !used[s]; s = succ[s]) {
      used[s] = true;
      cycle.push_back(walk[s]);
    }
    // Split at repeated nodes.
    std::vector<int> stack;
    auto emit = [&](std::vector<int> ids) {
      if (ids.size() < 3) return;
      SimpleLoop loop;
      for (int id : ids) loop.polygon.push_back(nodes[id]);
      double a = signed_area(loop.polygon);
      loop.area = std::abs(a);
      loop.sign = loop.area <= tol * diam ? 0 : (a > 0 ? 1 : -1);
      out.signed_sum += a;
      out.absolute_sum += loop.area;
      out.loops.push_back(std::move(loop));
    };
    for (int id : cycle) {
      auto it = std::find(stack.begin(), stack.end(), id);
      if (it != stack.end()) {
        emit(std::vector<int>(it, stack.end()));
        stack.erase(it + 1, stack.end());
      } else {
        stack.push_back(id);
      }
    }
    emit(stack);
  }
  return out;
}

}  // namespace polarcurv
