// Acceptance harness: one PASS/FAIL line per criterion.
// Exit status is 0 when every criterion not listed in kKnownBlocked passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "polarcurv/polarcurv.hpp"

using namespace polarcurv;

namespace {

const std::set<int> kKnownBlocked{4, 10};

struct Outcome {
  bool pass = false;
  std::string detail;
};

Mat2 diag(double a, double b) {
  Mat2 m;
  m << a, 0, 0, b;
  return m;
}

/// Four elliptic convex, four elliptic concave, eight hyperbolic, four mixed-sign random.
std::vector<Mat2> hessian_set() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> mag(0.3, 4.0), ang(0.0, std::numbers::pi), u(-3.0, 3.0);
  auto rotated = [&](double a, double b) {
    double t = ang(rng);
    Mat2 r;
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return Mat2(r * diag(a, b) * r.transpose());
  };
  std::vector<Mat2> out{diag(4, 0.4)};
  for (int i = 0; i < 4; ++i) out.push_back(rotated(mag(rng), mag(rng)));
  for (int i = 0; i < 4; ++i) out.push_back(rotated(-mag(rng), -mag(rng)));
  for (int i = 0; i < 8; ++i) out.push_back(rotated(mag(rng), -mag(rng)));
  while (out.size() < 21) {
    Mat2 h;
    h(0, 0) = u(rng);
    h(1, 1) = u(rng);
    h(0, 1) = h(1, 0) = u(rng);
    if (std::abs(h.determinant()) > 0.05) out.push_back(h);
  }
  return out;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mesh_area(const TriMesh& m) {
  double a = 0.0;
  for (int f = 0; f < m.num_faces(); ++f) a += m.face_area(f);
  return a;
}

Outcome c1_primal_exactness() {
  double worst = 0.0;
  int checked = 0, meshes = 0;
  for (const Mat2& h : hessian_set()) {
    TriMesh m = gen_paraboloid_mesh(h, GridSpec{7, 0.1});
    ++meshes;
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (m.is_boundary_vertex(v)) continue;
      Vec3 p = m.position(v);
      TriMesh c = paraboloid_apex_chart(h, Vec2(p.x(), p.y()), m);
      VertexAnalysis va = analyze_vertex(c, exact_normals(Paraboloid{h}, c), v);
      if (!va.regularity.usable()) continue;
      for (const auto& s : va.samples) {
        worst = std::max(worst, (s.A - h).norm() / h.norm());
        ++checked;
      }
    }
  }
  return {checked > 0 && worst <= 1e-9,
          fmt("%d meshes, %d vertex triangles, max rel err %.3e (tol 1e-9)", meshes, checked, worst)};
}

Outcome c2_dual_exactness() {
  double worst = 0.0;
  int checked = 0;
  for (const Mat2& h : hessian_set()) {
    TriMesh m = gen_paraboloid_mesh(h, GridSpec{7, 0.1});
    for (int k = 0; k < m.num_faces(); ++k) {
      Vec3 n = m.face_normal_raw(k);
      Vec2 g(-n.x() / n.z(), -n.y() / n.z());
      TriMesh c = paraboloid_apex_chart(h, h.inverse() * g, m);
      DualSurface d = build_dual_surface(c, exact_normals(Paraboloid{h}, c));
      DualVertexCurvature dv = analyze_dual_vertex(d, c, k);
      if (!dv.defined) continue;
      worst = std::max(worst, (dv.sample.A - h).norm() / h.norm());
      ++checked;
    }
  }
  return {checked > 0 && worst <= 1e-9, fmt("%d dual vertices, max rel err %.3e (tol 1e-9)", checked, worst)};
}

Outcome c3_polarity_offsets() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> off(-0.01, 0.01);
  std::vector<Mat2> hs = hessian_set();
  double worst = 0.0;
  int faces = 0, trial = 0;
  while (faces < 1000) {
    const Mat2& h = hs[trial++ % hs.size()];
    std::vector<double> offsets(81);
    for (double& o : offsets) o = off(rng);
    TriMesh m = gen_paraboloid_mesh(h, GridSpec{}, offsets);
    for (int v = 0; v < m.num_vertices() && faces < 1000; ++v) {
      if (m.is_boundary_vertex(v)) continue;
      Vec3 p = m.position(v);
      TriMesh c = paraboloid_apex_chart(h, Vec2(p.x(), p.y()), m);
      Polygon2 q = polar_dual_face(h, c, v);
      NormalImagePolygon f = normal_image(c, v, Vec3::UnitZ());
      for (std::size_t k = 0; k < q.size(); ++k) {
        Vec2 hq = h * q[k];
        worst = std::max(worst, (f.f[k] + hq).norm() / std::max(hq.norm(), 1e-300));
      }
      ++faces;
    }
  }
  return {worst <= 1e-9, fmt("%d faces, max rel err %.3e (tol 1e-9)", faces, worst)};
}

Outcome c4_sphere_exactness() {
  double vert = 0.0, dual = 0.0, willmore = 0.0;
  int vcount = 0, dcount = 0;
  for (int level = 0; level <= 2; ++level) {
    TriMesh m = gen_sphere_mesh(level);
    CurvatureField f = compute_curvature_field(m, exact_normals(Sphere{1.0}, m));
    for (const auto& va : f.vertices)
      for (const auto& s : va.samples) {
        vert = std::max(vert, (s.A + Mat2::Identity()).norm());
        ++vcount;
      }
    for (const auto& d : f.faces) {
      if (!d.defined) continue;
      dual = std::max(dual, (d.sample.A + Mat2::Identity()).norm());
      ++dcount;
    }
    willmore = std::max(willmore, std::abs(dual_energy(m, f, {DensityKind::Willmore, 1.0}).total));
  }
  bool ok = vert <= 1e-9 && dual <= 1e-9 && willmore <= 1e-9;
  return {ok, fmt("A* err %.3e over %d, A_km err %.3e over %d, |W| %.3e (tol 1e-9 each)", vert, vcount, dual, dcount,
                  willmore)};
}

Outcome c5_lantern() {
  std::vector<std::pair<int, int>> sweep;
  for (int n : {3, 5, 8, 12, 20})
    for (int m : {1, 4, 9, 25}) sweep.push_back({n, m});
  double worst = 0.0;
  for (auto [n, m] : sweep) {
    TriMesh mesh = gen_schwarz_lantern(1.0, 1.0, n, m);
    double closed = lantern_area_closed_form(1.0, 1.0, n, m);
    worst = std::max(worst, std::abs(mesh_area(mesh) - closed) / closed);
  }
  double limit = 2.0 * std::numbers::pi * std::sqrt(1.0 + std::pow(std::numbers::pi, 4) / 4.0);
  double a256 = lantern_area_closed_form(1.0, 1.0, 256, 256 * 256);
  double rel256 = std::abs(a256 - limit) / limit;
  double a512 = mesh_area(gen_schwarz_lantern(1.0, 1.0, 512, 4));
  double rel512 = std::abs(a512 - 2.0 * std::numbers::pi) / (2.0 * std::numbers::pi);
  TriMesh ring = gen_schwarz_lantern(1.0, 1.0, 128, 16);
  double ring_worst = 0.0;
  for (int k = 1; k < 16; ++k) {
    double sum = 0.0;
    for (int j = 0; j < 128; ++j) sum += angle_defect(ring, k * 128 + j);
    ring_worst = std::max(ring_worst, std::abs(sum));
  }
  bool ok = worst <= 1e-9 && rel256 <= 0.01 && rel512 <= 0.005 && ring_worst < 1e-2;
  return {ok, fmt("sweep rel err %.3e over %zu cases; n=256 m=n^2 off limit %.3e; n=512 m=4 off 2pi %.3e; "
                  "max |ring defect sum| %.3e",
                  worst, sweep.size(), rel256, rel512, ring_worst)};
}

Outcome c6_cube() {
  TriMesh m = gen_cube_centroid();
  std::vector<Vec3> nrm = heuristic_normals(m, NormalWeighting::Angle).normals;
  double en = edge_energy_normal(m, nrm).total;
  double es = edge_energy_spherical(m, nrm).total;
  double want_n = 24.0 + 12.0 * std::sqrt(3.0), want_s = 10.0 * std::numbers::pi;
  bool ok = std::abs(en - want_n) <= 1e-9 && std::abs(es - want_s) <= 1e-9 && en >= es;
  return {ok, fmt("normal %.12f (want %.12f), spherical %.12f (want %.12f)", en, want_n, es, want_s)};
}

Outcome c7_majorization() {
  std::vector<TriMesh> meshes{gen_cube_centroid()};
  for (auto [r, hgt, n, mm] : std::vector<std::tuple<double, double, int, int>>{
           {1, 1, 8, 4}, {1, 1, 16, 16}, {1, 1, 8, 64}, {1, 2, 6, 3}, {0.5, 1, 12, 8}})
    meshes.push_back(gen_schwarz_lantern(r, hgt, n, mm));
  for (int level = 0; level <= 2; ++level) meshes.push_back(gen_sphere_mesh(level));
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& m : meshes) {
    std::vector<Vec3> nrm = heuristic_normals(m, NormalWeighting::Angle).normals;
    min_gap = std::min(min_gap, edge_energy_normal(m, nrm).total - edge_energy_spherical(m, nrm).total);
  }
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, std::numbers::pi - 1e-3);
  double tan_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    double phi = u(rng);
    tan_gap = std::min(tan_gap, 2.0 * std::tan(0.5 * phi) - phi);
  }
  return {min_gap >= 0.0 && tan_gap >= 0.0,
          fmt("%zu meshes, min energy gap %.6f; 1e4 angles, min 2tan(phi/2)-phi %.3e", meshes.size(), min_gap,
              tan_gap)};
}

Outcome c8_domination() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    Mat2 a;
    a << u(rng), u(rng), u(rng), u(rng);
    double det = std::abs(a.determinant());
    worst = std::min(worst, density(a, {DensityKind::MeanPlusAbs, 1.0}) - det);
    for (double eps : {0.01, 1.0, 100.0}) worst = std::min(worst, density(a, {DensityKind::Epsilon, eps}) - det);
  }
  return {worst >= -1e-12, fmt("1000 matrices, min slack %.3e (tol -1e-12)", worst)};
}

Outcome c9_convergence() {
  std::vector<double> hs{0.1, 0.05, 0.025}, err, sup;
  Graph g;
  int usable = 0;
  for (double h : hs) {
    TriMesh m = gen_graph_mesh(g, Domain{0.3, 1.2, 0.3, 1.2}, h);
    CurvatureField f = compute_curvature_field(m, exact_normals(g, m));
    DeviationField d = deviation(m, f);
    double e = 0.0, s = 0.0;
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (m.is_boundary_vertex(v) || f.vertices[v].regularity.kind != Regularity::Regular) continue;
      Mat2 truth = ground_truth(g, m.position(v)).A;
      for (const auto& x : f.vertices[v].samples) e = std::max(e, (x.A - truth).norm());
      ++usable;
    }
    for (const auto& r : d.records)
      if (f.vertices[r.vertex].regularity.kind == Regularity::Regular) s = std::max(s, r.delta);
    err.push_back(e);
    sup.push_back(s);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    double x = std::log(hs[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = static_cast<double>(hs.size());
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  bool mono = sup[1] < sup[0] && sup[2] < sup[1];
  return {usable > 0 && slope >= 0.8 && mono,
          fmt("max err %.4f %.4f %.4f, slope %.3f (min 0.8); sup delta %.4f %.4f %.4f", err[0], err[1], err[2], slope,
              sup[0], sup[1], sup[2])};
}

Outcome c10_deviation() {
  double sphere_sup = 0.0;
  for (int level = 0; level <= 2; ++level) {
    TriMesh m = gen_sphere_mesh(level);
    sphere_sup = std::max(sphere_sup, deviation(m, exact_normals(Sphere{1.0}, m)).sup);
  }
  Mat2 h = diag(4, 0.4);
  TriMesh pm = gen_paraboloid_mesh(h, GridSpec{});
  double par_sup = deviation(pm, exact_normals(Paraboloid{h}, pm)).sup;

  TriMesh m = gen_sphere_mesh(2);
  std::vector<Vec3> nrm = exact_normals(Sphere{1.0}, m);
  const int v = 10;
  auto [e1, e2] = tangent_basis(nrm[v]);
  (void)e2;
  double base = deviation(m, nrm).delta2;
  std::vector<double> d2;
  for (double deg : {1.0, 2.0, 5.0, 10.0}) {
    std::vector<Vec3> p = nrm;
    p[v] = (Eigen::AngleAxisd(deg * std::numbers::pi / 180.0, e1) * nrm[v]).normalized();
    d2.push_back(deviation(m, p).delta2);
  }
  bool mono = d2[0] > base && d2[1] > d2[0] && d2[2] > d2[1] && d2[3] > d2[2];
  bool ok = sphere_sup < 1e-9 && par_sup < 1e-9 && d2[2] > 0.0 && mono;
  return {ok, fmt("sup delta sphere %.3e, paraboloid %.3e (tol 1e-9); delta2 at 0/1/2/5/10 deg %.4e %.4e %.4e %.4e "
                  "%.4e (%s)",
                  sphere_sup, par_sup, base, d2[0], d2[1], d2[2], d2[3], mono ? "monotone" : "not monotone")};
}

Outcome c11_normal_fit() {
  TriMesh m = gen_sphere_mesh(2);
  NormalField init;
  init.normals = perturb_normals(exact_normals(Sphere{1.0}, m), 5.0 * std::numbers::pi / 180.0, 42);
  OptimizeOptions opt;
  opt.max_iter = 200;
  OptimizeResult r = optimize_normals(m, init, opt);
  bool ok = r.field.final_delta2 <= 0.5 * r.field.initial_delta2 && r.monotone && r.field.iterations <= 200;
  return {ok, fmt("delta2 %.4e -> %.4e (ratio %.3f, max 0.5) in %d sweeps, %s", r.field.initial_delta2,
                  r.field.final_delta2, r.field.final_delta2 / r.field.initial_delta2, r.field.iterations,
                  r.monotone ? "monotone" : "NOT monotone")};
}

Outcome c12_non_regular() {
  Mat2 h = diag(4, 0.4);
  TriMesh m = gen_paraboloid_mesh(h, GridSpec{}, {}, GridPattern::Anisotropic);
  std::vector<Vec3> nrm = exact_normals(Paraboloid{h}, m);
  CurvatureField f = compute_curvature_field(m, nrm);
  int non_regular = 0, loops_ok = 0, defect_ok = 0;
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (f.vertices[v].regularity.kind != Regularity::NonRegular) continue;
    ++non_regular;
    const auto& rec = f.dual.faces[v];
    if (!rec.image) continue;
    LoopDecomposition ld = decompose_normal_image(rec.image->f);
    loops_ok += ld.absolute_sum > std::abs(ld.signed_sum);
    PrincipalComponent pc = principal_component(m, vertex_star(m, v), *rec.image);
    defect_ok += pc.defect > 0.0;
  }
  bool ok = non_regular >= 1 && loops_ok >= 1 && defect_ok >= 1;
  return {ok, fmt("%d NonRegular vertices; abs > |signed| at %d; principal defect > 0 at %d", non_regular, loops_ok,
                  defect_ok)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> criteria{
      {1, "primal tensor exactness on paraboloids", c1_primal_exactness},
      {2, "dual tensor exactness on paraboloids", c2_dual_exactness},
      {3, "polarity with vertex offsets", c3_polarity_offsets},
      {4, "sphere exactness", c4_sphere_exactness},
      {5, "Schwarz lantern areas and ring defects", c5_lantern},
      {6, "cube-with-centroids edge energies", c6_cube},
      {7, "edge energy majorization", c7_majorization},
      {8, "density domination", c8_domination},
      {9, "convergence on sin x sin y", c9_convergence},
      {10, "deviation exactness and growth", c10_deviation},
      {11, "normal fitting", c11_normal_fit},
      {12, "non-regular detection", c12_non_regular},
  };
  int unexpected = 0;
  auto total_start = std::chrono::steady_clock::now();
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool blocked = kKnownBlocked.count(c.id) > 0;
    const char* tag = o.pass ? "PASS" : (blocked ? "FAIL (known, see decisions ledger)" : "FAIL");
    std::printf("[%2d] %s: %s | %s | %.2f s\n", c.id, tag, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass && !blocked) ++unexpected;
  }
  double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - total_start).count();
  std::printf("total %.2f s, %d unexpected failure(s)\n", total, unexpected);
  return unexpected == 0 ? 0 : 1;
}
