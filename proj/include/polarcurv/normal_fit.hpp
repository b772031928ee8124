#pragma once

// Normal fitting: coordinate descent on the primal/dual deviation with incremental
// re-evaluation of the stars touched by a perturbed vertex.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "polarcurv/correspondence.hpp"
#include "polarcurv/normals.hpp"

namespace polarcurv {

enum class FitObjective { Delta2, Delta1, Sup };

inline const char* to_string(FitObjective o) {
  switch (o) {
    case FitObjective::Delta2: return "delta2";
    case FitObjective::Delta1: return "delta1";
    case FitObjective::Sup: return "sup";
  }
  return "?";
}

struct VertexObjective {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double sup = 0.0;
  bool evaluable = false;
};

inline VertexObjective summarize(const VertexDeviation& d) {
  VertexObjective o;
  o.evaluable = d.evaluable;
  std::tie(o.delta1, o.delta2) = deviation_integrals(d.records);
  for (const auto& r : d.records) o.sup = std::max(o.sup, r.delta);
  return o;
}

inline double objective_value(const std::vector<VertexObjective>& per, FitObjective obj) {
  double s = 0.0;
  for (const auto& o : per) {
    if (!o.evaluable) continue;
    switch (obj) {
      case FitObjective::Delta2: s += o.delta2; break;
      case FitObjective::Delta1: s += o.delta1; break;
      case FitObjective::Sup: s = std::max(s, o.sup); break;
    }
  }
  return s;
}

/// Curvature field plus per-vertex deviation terms, updatable one normal at a time.
class DeviationEvaluator {
 public:
  DeviationEvaluator(const TriMesh& mesh, std::vector<Vec3> normals) : mesh_(mesh) {
    field_ = compute_curvature_field(mesh, normals);
    per_.resize(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) per_[v] = summarize(vertex_deviation(mesh, field_, v));
    const int nv = mesh.num_vertices();
    faces1_.resize(nv);
    verts1_.resize(nv);
    faces2_.resize(nv);
    verts2_.resize(nv);
    for (int v = 0; v < nv; ++v) {
      std::set<int> f1, v1, f2, v2;
      for (int f : vertex_star(mesh, v).faces) f1.insert(f);
      v1.insert(v);
      for (int f : f1)
        for (int c : mesh.triangle(f)) v1.insert(c);
      for (int u : v1)
        for (int f : vertex_star(mesh, u).faces) f2.insert(f);
      for (int f : f2)
        for (int c : mesh.triangle(f)) v2.insert(c);
      faces1_[v].assign(f1.begin(), f1.end());
      verts1_[v].assign(v1.begin(), v1.end());
      faces2_[v].assign(f2.begin(), f2.end());
      verts2_[v].assign(v2.begin(), v2.end());
    }
  }

  const std::vector<Vec3>& normals() const { return field_.dual.normals; }
  const CurvatureField& field() const { return field_; }
  const std::vector<VertexObjective>& per_vertex() const { return per_; }
  const std::vector<int>& influence(int v) const { return verts2_[v]; }

  double total(FitObjective obj) const { return objective_value(per_, obj); }

  /// Objective restricted to the vertices whose terms depend on the normal at v.
  double local(int v, FitObjective obj) const {
    double s = 0.0;
    for (int i : verts2_[v]) {
      const auto& o = per_[i];
      if (!o.evaluable) continue;
      switch (obj) {
        case FitObjective::Delta2: s += o.delta2; break;
        case FitObjective::Delta1: s += o.delta1; break;
        case FitObjective::Sup: s = std::max(s, o.sup); break;
      }
    }
    return s;
  }

  bool any_evaluable(int v) const {
    for (int i : verts2_[v])
      if (per_[i].evaluable) return true;
    return false;
  }

  struct Snapshot {
    int v = -1;
    Vec3 normal;
    std::vector<DualVertex> dv;
    std::vector<DualFaceRecord> df;
    std::vector<VertexAnalysis> va;
    std::vector<DualVertexCurvature> dc;
    std::vector<VertexObjective> obj;
  };

  /// Sets the normal at v and refreshes every dependent quantity. Returns the state
  /// needed to undo the change.
  Snapshot set_normal(int v, const Vec3& n) {
    Snapshot s;
    s.v = v;
    s.normal = field_.dual.normals[v];
    for (int f : faces1_[v]) s.dv.push_back(field_.dual.vertices[f]);
    for (int u : verts1_[v]) {
      s.df.push_back(field_.dual.faces[u]);
      s.va.push_back(field_.vertices[u]);
    }
    for (int f : faces2_[v]) s.dc.push_back(field_.faces[f]);
    for (int u : verts2_[v]) s.obj.push_back(per_[u]);

    field_.dual.normals[v] = n;
    const auto& normals = field_.dual.normals;
    for (int f : faces1_[v]) field_.dual.vertices[f] = compute_dual_vertex(mesh_, normals, f);
    for (int u : verts1_[v]) {
      field_.dual.faces[u] = compute_dual_face_record(mesh_, normals, field_.dual.vertices, u);
      field_.vertices[u] = analyze_vertex(field_.dual, mesh_, u);
    }
    for (int f : faces2_[v]) field_.faces[f] = analyze_dual_vertex(field_.dual, mesh_, f);
    for (int u : verts2_[v]) per_[u] = summarize(vertex_deviation(mesh_, field_, u));
    return s;
  }

  void restore(const Snapshot& s) {
    const int v = s.v;
    field_.dual.normals[v] = s.normal;
    for (std::size_t j = 0; j < faces1_[v].size(); ++j) field_.dual.vertices[faces1_[v][j]] = s.dv[j];
    for (std::size_t j = 0; j < verts1_[v].size(); ++j) {
      field_.dual.faces[verts1_[v][j]] = s.df[j];
      field_.vertices[verts1_[v][j]] = s.va[j];
    }
    for (std::size_t j = 0; j < faces2_[v].size(); ++j) field_.faces[faces2_[v][j]] = s.dc[j];
    for (std::size_t j = 0; j < verts2_[v].size(); ++j) per_[verts2_[v][j]] = s.obj[j];
  }

  /// True if some vertex near v was evaluable in `before` but is not now.
  bool lost_evaluability(const Snapshot& before) const {
    const auto& ids = verts2_[before.v];
    for (std::size_t j = 0; j < ids.size(); ++j)
      if (before.obj[j].evaluable && !per_[ids[j]].evaluable) return true;
    return false;
  }

 private:
  const TriMesh& mesh_;
  CurvatureField field_;
  std::vector<VertexObjective> per_;
  std::vector<std::vector<int>> faces1_, verts1_, faces2_, verts2_;
};

struct OptimizeOptions {
  int max_iter = 200;
  double tol = 1e-6;
  FitObjective objective = FitObjective::Delta2;
  double fd_step = 1e-5;
  double armijo = 1e-4;
  double initial_step = 0.05;  // radians
  int max_halvings = 30;
  int check_every = 50;
};

struct OptimizeResult {
  NormalField field;
  std::vector<int> frozen;        // ascending vertex indices
  std::vector<double> history;    // objective before the first sweep, then after each sweep
  int accepted_steps = 0;
  int rejected_steps = 0;         // candidate steps dropped for losing evaluability
  double max_rebuild_gap = 0.0;   // relative incremental-vs-full disagreement
  bool monotone = true;
};

inline double full_objective(const TriMesh& mesh, const std::vector<Vec3>& normals, FitObjective obj) {
  CurvatureField cf = compute_curvature_field(mesh, normals);
  std::vector<VertexObjective> per(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) per[v] = summarize(vertex_deviation(mesh, cf, v));
  return objective_value(per, obj);
}

inline OptimizeResult optimize_normals(const TriMesh& mesh, const NormalField& init, const OptimizeOptions& opt = {}) {
  if (static_cast<int>(init.normals.size()) != mesh.num_vertices())
    throw Error(ErrorCode::InvalidParams, "need exactly one normal per vertex");
  if (opt.max_iter < 0 || !(opt.tol >= 0.0)) throw Error(ErrorCode::InvalidParams, "bad iteration limits");
  DeviationEvaluator ev(mesh, init.normals);
  const FitObjective obj = opt.objective;
  OptimizeResult res;
  std::vector<bool> frozen(mesh.num_vertices(), false);
  int active = 0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.is_isolated(v) || !ev.any_evaluable(v)) {
      frozen[v] = true;
      res.frozen.push_back(v);
    } else {
      ++active;
    }
  }
  if (active == 0)
    throw Error(ErrorCode::NonRegularBlock, "the dual construction fails around every vertex; nothing to optimise");

  double current = ev.total(obj);
  const double initial = current;
  res.history.push_back(current);
  int sweep = 0;
  for (; sweep < opt.max_iter && current > 0.0; ++sweep) {
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      if (frozen[v]) continue;
      const Vec3 n0 = ev.normals()[v];
      auto [e1, e2] = tangent_basis(n0);
      auto trial = [&](double a, double b, bool keep) -> double {
        Vec3 n = (n0 + a * e1 + b * e2).normalized();
        double before = ev.local(v, obj);
        auto snap = ev.set_normal(v, n);
        if (ev.lost_evaluability(snap)) {
          ev.restore(snap);
          return std::numeric_limits<double>::infinity();
        }
        double after = ev.local(v, obj);
        if (!keep) ev.restore(snap);
        return after - before;
      };
      const double h = opt.fd_step;
      double gp = trial(h, 0, false), gm = trial(-h, 0, false);
      double hp = trial(0, h, false), hm = trial(0, -h, false);
      auto comp = [h](double p, double m) {
        if (std::isfinite(p) && std::isfinite(m)) return (p - m) / (2.0 * h);
        if (std::isfinite(p)) return p / h;
        if (std::isfinite(m)) return -m / h;
        return 0.0;
      };
      Vec2 g(comp(gp, gm), comp(hp, hm));
      double gn = g.norm();
      if (!(gn > 0.0) || !std::isfinite(gn)) continue;
      Vec2 d = -g / gn;
      double t = opt.initial_step;
      for (int k = 0; k <= opt.max_halvings; ++k, t *= 0.5) {
        double change = trial(t * d.x(), t * d.y(), false);
        if (!std::isfinite(change)) {
          ++res.rejected_steps;
          continue;
        }
        if (change <= -opt.armijo * t * gn && change < 0.0) {
          double before_total = ev.total(obj);
          trial(t * d.x(), t * d.y(), true);
          double after_total = ev.total(obj);
          if (after_total > before_total) res.monotone = false;
          ++res.accepted_steps;
          break;
        }
      }
    }
    double next = ev.total(obj);
    res.history.push_back(next);
    if (next > current) res.monotone = false;
    if ((sweep + 1) % opt.check_every == 0) {
      double full = full_objective(mesh, ev.normals(), obj);
      res.max_rebuild_gap = std::max(res.max_rebuild_gap, std::abs(full - next) / std::max(1.0, std::abs(full)));
    }
    double rel = current > 0.0 ? (current - next) / current : 0.0;
    current = next;
    if (rel < opt.tol) {
      ++sweep;
      break;
    }
  }
  double full = full_objective(mesh, ev.normals(), obj);
  res.max_rebuild_gap = std::max(res.max_rebuild_gap, std::abs(full - current) / std::max(1.0, std::abs(full)));
  res.field.normals = ev.normals();
  res.field.source = NormalSource::Optimized;
  res.field.iterations = sweep;
  res.field.initial_delta2 = initial;
  res.field.final_delta2 = current;
  return res;
}

}  // namespace polarcurv
