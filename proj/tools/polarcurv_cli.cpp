// polarcurv: command-line front end for the polarcurv library.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "polarcurv/polarcurv.hpp"

namespace {

using json = nlohmann::json;
using namespace polarcurv;
namespace fs = std::filesystem;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeOptions {
  std::string shape;
  double hxx = 4.0, hxy = 0.0, hyy = 0.4;
  int grid = 9;
  double spacing = 0.1;
  std::string pattern = "isotropic";
  double offset_amp = 0.0;
  int level = 2;
  double r = 1.0, hgt = 1.0;
  int n = 8, m = 4;
  double h = 0.1;
  double x0 = 0.3, x1 = 1.2, y0 = 0.3, y1 = 1.2;
  double cubic = 0.0;
};

struct Options {
  ShapeOptions shape;
  std::string input, truth, output;
  std::string normals = "exact", normals_file;
  std::string kind = "e2";
  double eps = 1.0;
  std::string csv;
  int levels = 3;
  double h0 = 0.1;
  std::vector<int> n_list;
  std::string m_rule = "fixed";
  double q = 1.0;
  std::string init = "area", init_file, objective = "delta2";
  int max_iter = 200;
  double tol = 1e-6;
  double perturb_deg = 0.0;
  std::uint64_t seed = 1;
  double max_singular = 0.5;
  bool no_timestamp = false;
};

struct Loaded {
  TriMesh mesh;
  std::optional<ReferenceSurface> surface;
  std::optional<std::vector<Vec3>> truth_normals;
};

// ---------- JSON helpers ----------

json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json to_json(const Mat2& a) { return json::array({json::array({a(0, 0), a(0, 1)}), json::array({a(1, 0), a(1, 1)})}); }

json to_json(const Polygon2& p) {
  json out = json::array();
  for (const auto& x : p) out.push_back(to_json(x));
  return out;
}

json to_json(const std::vector<Vec3>& p) {
  json out = json::array();
  for (const auto& x : p) out.push_back(to_json(x));
  return out;
}

json to_json(const VertexFrame& f) {
  return {{"origin", to_json(f.origin)}, {"normal", to_json(f.normal)}, {"e1", to_json(f.e1)}, {"e2", to_json(f.e2)}};
}

std::string timestamp_utc() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json config_json(const CLI::App& sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name.empty()) continue;
    if (opt->get_expected_min() == 0) {
      cfg[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& res = opt->results();
      if (res.size() == 1) cfg[name] = res[0];
      else cfg[name] = res;
    } else {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

json envelope(const std::string& cmd, const json& config, const Options& o) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["version"] = kVersion;
  j["command"] = cmd;
  j["config"] = config;
  if (!o.no_timestamp) j["timestamp"] = timestamp_utc();
  return j;
}

void write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

void write_json(const json& j, const std::string& path) { write_text(j.dump(2) + "\n", path); }

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

std::vector<Vec3> parse_normals(const json& j, int expected, const std::string& what) {
  const json& arr = j.is_object() && j.contains("normals") ? j.at("normals") : j;
  if (!arr.is_array()) throw ValidationError(what + ": expected an array of [vx, vy, vz]");
  if (static_cast<int>(arr.size()) != expected)
    throw ValidationError(what + ": " + std::to_string(arr.size()) + " normals for " + std::to_string(expected) +
                          " vertices");
  std::vector<Vec3> out;
  for (const auto& n : arr) {
    if (!n.is_array() || n.size() != 3) throw ValidationError(what + ": every normal needs three components");
    Vec3 v(n[0].get<double>(), n[1].get<double>(), n[2].get<double>());
    if (!v.allFinite() || std::abs(v.norm() - 1.0) > kUnitNormalTol)
      throw Error(ErrorCode::NonUnitNormal, what + ": normals must be unit vectors");
    out.push_back(v);
  }
  return out;
}

// ---------- shapes ----------

Mat2 hessian(const ShapeOptions& s) {
  Mat2 h;
  h << s.hxx, s.hxy, s.hxy, s.hyy;
  return h;
}

json surface_json(const ReferenceSurface& s) {
  return std::visit(
      [](const auto& surf) -> json {
        using T = std::decay_t<decltype(surf)>;
        if constexpr (std::is_same_v<T, Paraboloid>) {
          return {{"type", "paraboloid"}, {"H", to_json(surf.H)}};
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return {{"type", "sphere"}, {"R", surf.R}};
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          return {{"type", "cylinder"}, {"R", surf.R}};
        } else {
          return {{"type", surf.kind == GraphKind::SinSin ? "graph-sinsin" : "graph-cubic"},
                  {"H", to_json(surf.H)},
                  {"cubic", surf.cubic}};
        }
      },
      s);
}

Mat2 mat_from_json(const json& j) {
  Mat2 a;
  a << j.at(0).at(0).get<double>(), j.at(0).at(1).get<double>(), j.at(1).at(0).get<double>(),
      j.at(1).at(1).get<double>();
  return a;
}

ReferenceSurface surface_from_json(const json& j) {
  const std::string t = j.at("type").get<std::string>();
  if (t == "paraboloid") return Paraboloid{mat_from_json(j.at("H"))};
  if (t == "sphere") return Sphere{j.at("R").get<double>()};
  if (t == "cylinder") return Cylinder{j.at("R").get<double>()};
  Graph g;
  g.kind = t == "graph-sinsin" ? GraphKind::SinSin : GraphKind::QuadraticCubic;
  g.H = mat_from_json(j.at("H"));
  g.cubic = j.at("cubic").get<double>();
  return g;
}

GridPattern pattern_of(const std::string& p) {
  if (p == "isotropic") return GridPattern::Isotropic;
  if (p == "anisotropic") return GridPattern::Anisotropic;
  throw ValidationError("unknown grid pattern '" + p + "'");
}

Loaded make_shape(const ShapeOptions& s, std::uint64_t seed) {
  Loaded out;
  const std::string& k = s.shape;
  if (k == "paraboloid" || k == "plane") {
    Mat2 h = k == "plane" ? Mat2::Zero() : hessian(s);
    std::vector<double> offsets;
    if (s.offset_amp > 0.0) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(-s.offset_amp, s.offset_amp);
      offsets.resize(static_cast<std::size_t>(s.grid) * s.grid);
      for (double& x : offsets) x = u(rng);
    }
    out.mesh = gen_paraboloid_mesh(h, GridSpec{s.grid, s.spacing}, offsets, pattern_of(s.pattern));
    if (offsets.empty()) out.surface = Paraboloid{h};
  } else if (k == "sphere") {
    out.mesh = gen_sphere_mesh(s.level);
    out.surface = Sphere{1.0};
  } else if (k == "lantern") {
    out.mesh = gen_schwarz_lantern(s.r, s.hgt, s.n, s.m);
    out.surface = Cylinder{s.r};
  } else if (k == "cube-centroid") {
    out.mesh = gen_cube_centroid();
  } else if (k == "graph-sinsin" || k == "graph-cubic") {
    Graph g;
    g.kind = k == "graph-sinsin" ? GraphKind::SinSin : GraphKind::QuadraticCubic;
    if (g.kind == GraphKind::QuadraticCubic) {
      g.H = hessian(s);
      g.cubic = s.cubic;
    }
    out.mesh = gen_graph_mesh(g, Domain{s.x0, s.x1, s.y0, s.y1}, s.h);
    out.surface = g;
  } else if (k.empty()) {
    throw ValidationError("need --input or --shape");
  } else {
    throw ValidationError("unknown shape '" + k + "'");
  }
  return out;
}

std::string sidecar_path(const std::string& obj) {
  fs::path p(obj);
  p.replace_extension(".truth.json");
  return p.string();
}

Loaded load_input(const Options& o) {
  if (o.input.empty()) return make_shape(o.shape, o.seed);
  if (!o.shape.shape.empty()) throw ValidationError("--input and --shape are mutually exclusive");
  Loaded out;
  std::vector<std::string> warnings;
  out.mesh = load_obj(o.input, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::string truth = o.truth.empty() ? sidecar_path(o.input) : o.truth;
  if (!o.truth.empty() || fs::exists(truth)) {
    json t = read_json_file(truth);
    if (t.contains("surface") && !t.at("surface").is_null()) out.surface = surface_from_json(t.at("surface"));
    if (t.contains("normals")) out.truth_normals = parse_normals(t, out.mesh.num_vertices(), truth);
  }
  return out;
}

std::vector<Vec3> choose_normals(const Loaded& in, const std::string& mode, const std::string& file) {
  if (mode == "exact") {
    if (in.truth_normals) return *in.truth_normals;
    if (in.surface) return exact_normals(*in.surface, in.mesh);
    throw ValidationError("exact normals need an analytic shape or a truth sidecar");
  }
  if (mode == "area") return heuristic_normals(in.mesh, NormalWeighting::Area).normals;
  if (mode == "angle") return heuristic_normals(in.mesh, NormalWeighting::Angle).normals;
  if (mode == "file") {
    if (file.empty()) throw ValidationError("normal source 'file' needs --normals-file");
    return parse_normals(read_json_file(file), in.mesh.num_vertices(), file);
  }
  throw ValidationError("unknown normal source '" + mode + "'");
}

json mesh_summary(const TriMesh& m) {
  int boundary = 0;
  for (int v = 0; v < m.num_vertices(); ++v) boundary += m.is_boundary_vertex(v);
  return {{"vertices", m.num_vertices()},
          {"faces", m.num_faces()},
          {"edges", m.num_edges()},
          {"boundary_vertices", boundary}};
}

int interior_count(const TriMesh& m) {
  int n = 0;
  for (int v = 0; v < m.num_vertices(); ++v) n += !m.is_boundary_vertex(v) && !m.is_isolated(v);
  return n;
}

/// Throws NumericalFailure when singular systems exceed the allowed vertex fraction.
void check_singular(int singular, int interior, double allowed, json& out) {
  double frac = interior > 0 ? static_cast<double>(singular) / interior : 0.0;
  out["singular_vertices"] = singular;
  out["singular_fraction"] = frac;
  if (frac > allowed) {
    std::ostringstream os;
    os << singular << " of " << interior << " interior vertices have singular systems (allowed fraction " << allowed
       << ")";
    throw NumericalFailure(os.str());
  }
}

int singular_vertices(const CurvatureField& f) {
  int n = 0;
  for (const auto& va : f.vertices)
    n += va.regularity.reason == RegularityReason::SingularDual || va.regularity.reason == RegularityReason::SingularImage;
  return n;
}

// ---------- subcommands ----------

void cmd_gen(const Options& o, const json& cfg) {
  if (!o.input.empty()) throw ValidationError("gen takes --shape, not --input");
  if (o.output.empty()) throw ValidationError("gen needs -o <mesh.obj>");
  Loaded in = make_shape(o.shape, o.seed);
  save_obj(in.mesh, o.output);
  json summary = envelope("gen", cfg, o);
  summary["mesh"] = mesh_summary(in.mesh);
  summary["obj"] = o.output;
  summary["truth"] = nullptr;
  if (in.surface) {
    json t = envelope("gen", cfg, o);
    t["surface"] = surface_json(*in.surface);
    json normals = json::array(), ops = json::array(), frames = json::array();
    for (int v = 0; v < in.mesh.num_vertices(); ++v) {
      GroundTruth g = ground_truth(*in.surface, in.mesh.position(v));
      normals.push_back(to_json(g.normal));
      ops.push_back(to_json(g.A));
      frames.push_back({to_json(g.e1), to_json(g.e2)});
    }
    t["normals"] = normals;
    t["shape_operators"] = ops;
    t["frames"] = frames;
    std::string path = sidecar_path(o.output);
    write_json(t, path);
    summary["truth"] = path;
  }
  write_json(summary, "-");
}

void cmd_dual(const Options& o, const json& cfg) {
  Loaded in = load_input(o);
  std::vector<Vec3> nrm = choose_normals(in, o.normals, o.normals_file);
  DualSurface d = build_dual_surface(in.mesh, nrm);
  json out = envelope("dual", cfg, o);
  out["mesh"] = mesh_summary(in.mesh);
  json faces = json::array();
  int singular = 0;
  for (int v = 0; v < in.mesh.num_vertices(); ++v) {
    const DualFaceRecord& r = d.faces[v];
    json f = {{"vertex", v}, {"status", to_string(r.status)}};
    singular += r.status == DualStatus::Singular;
    if (r.status == DualStatus::Defined) {
      f["faces"] = r.face.faces;
      f["q"] = to_json(r.face.q);
      f["q3"] = to_json(r.face.q3);
      f["residuals"] = r.face.residuals;
      f["frame"] = to_json(r.face.frame);
      f["simple"] = r.simple;
      f["convex"] = r.convex;
      f["self_intersections"] = r.self_intersections;
      f["normal_image"] = r.image ? to_json(r.image->f) : json(nullptr);
    }
    faces.push_back(f);
  }
  json verts = json::array();
  for (int k = 0; k < in.mesh.num_faces(); ++k) {
    const DualVertex& dv = d.vertices[k];
    verts.push_back({{"face", k},
                     {"defined", dv.defined},
                     {"q", dv.defined ? to_json(dv.q) : json(nullptr)},
                     {"residual", dv.residual},
                     {"consistency", dv.consistency}});
  }
  json edges = json::array();
  for (const auto& e : d.edges)
    edges.push_back({{"primal_edge", e.primal_edge}, {"a", e.face_a}, {"b", e.face_b}, {"defined", e.defined}});
  out["dual_faces"] = faces;
  out["dual_vertices"] = verts;
  out["dual_edges"] = edges;
  out["consistency_error"] = d.consistency_error;
  out["num_defined_faces"] = d.num_defined_faces();
  out["num_interior_vertices"] = d.num_interior_vertices;
  try {
    check_singular(singular, interior_count(in.mesh), o.max_singular, out);
  } catch (const NumericalFailure&) {
    write_json(out, o.output);
    throw;
  }
  write_json(out, o.output);
}

json sample_json(const CurvatureTensorSample& s) {
  return {{"triangle", s.triangle},
          {"A", to_json(s.A)},
          {"area", s.area},
          {"k1", s.principal.k1},
          {"k2", s.principal.k2},
          {"dir1", to_json(s.principal.dir1)},
          {"dir2", to_json(s.principal.dir2)},
          {"ambiguous", s.principal.ambiguous}};
}

void cmd_curv(const Options& o, const json& cfg) {
  Loaded in = load_input(o);
  const TriMesh& m = in.mesh;
  std::vector<Vec3> nrm = choose_normals(in, o.normals, o.normals_file);
  CurvatureField field = compute_curvature_field(m, nrm);
  json out = envelope("curv", cfg, o);
  out["mesh"] = mesh_summary(m);
  json verts = json::array();
  std::map<std::string, int> counts;
  for (int v = 0; v < m.num_vertices(); ++v) {
    const VertexAnalysis& va = field.vertices[v];
    counts[to_string(va.regularity.kind)]++;
    json j = {{"vertex", v},
              {"regularity", to_string(va.regularity.kind)},
              {"reason", to_string(va.regularity.reason)},
              {"boundary", m.is_boundary_vertex(v)}};
    bool interior = !m.is_boundary_vertex(v) && !m.is_isolated(v);
    j["angle_defect"] = interior ? json(angle_defect(m, v)) : json(nullptr);
    json samples = json::array();
    for (const auto& s : va.samples) samples.push_back(sample_json(s));
    j["samples"] = samples;
    if (va.regularity.kind == Regularity::WeaklyRegular) {
      j["star_q"] = to_json(va.star_q);
      j["ear_fallback"] = va.ear_fallback;
    }
    const auto& rec = field.dual.faces[v];
    if (interior && rec.image) {
      LoopDecomposition ld = decompose_normal_image(rec.image->f);
      j["loops"] = {{"count", ld.loops.size()}, {"signed", ld.signed_sum}, {"absolute", ld.absolute_sum}};
      try {
        PrincipalComponent pc = principal_component(m, vertex_star(m, v), *rec.image);
        j["principal_defect"] = pc.defect;
        j["principal_changed"] = pc.changed;
      } catch (const Error& e) {
        j["principal_defect"] = nullptr;
        j["principal_error"] = to_string(e.code());
      }
    }
    verts.push_back(j);
  }
  json faces = json::array();
  for (int k = 0; k < m.num_faces(); ++k) {
    const DualVertexCurvature& d = field.faces[k];
    json j = {{"face", k}, {"defined", d.defined}};
    if (d.defined) {
      j["A"] = to_json(d.sample.A);
      j["k1"] = d.sample.principal.k1;
      j["k2"] = d.sample.principal.k2;
    } else {
      j["reason"] = d.reason;
    }
    faces.push_back(j);
  }
  out["vertices"] = verts;
  out["faces"] = faces;
  out["regularity_counts"] = counts;
  try {
    check_singular(singular_vertices(field), interior_count(m), o.max_singular, out);
  } catch (const NumericalFailure&) {
    write_json(out, o.output);
    throw;
  }
  write_json(out, o.output);
}

json report_json(const EnergyReport& r) {
  json c = json::array();
  for (const auto& x : r.contributions) c.push_back({{"entity", x.entity}, {"value", x.value}});
  return {{"kind", r.kind},
          {"total", r.total},
          {"contributions", c},
          {"skipped", r.skipped},
          {"skipped_count", r.skipped.size()},
          {"note", r.note}};
}

void cmd_energy(const Options& o, const json& cfg) {
  Loaded in = load_input(o);
  const TriMesh& m = in.mesh;
  std::vector<Vec3> nrm = choose_normals(in, o.normals, o.normals_file);
  json out = envelope("energy", cfg, o);
  out["mesh"] = mesh_summary(m);
  std::optional<DensityKind> dk;
  if (o.kind == "e1") dk = DensityKind::MeanPlusAbs;
  else if (o.kind == "e2") dk = DensityKind::Quadratic;
  else if (o.kind == "eps") dk = DensityKind::Epsilon;
  else if (o.kind == "willmore") dk = DensityKind::Willmore;
  else if (o.kind != "edge-normal" && o.kind != "edge-spherical")
    throw ValidationError("unknown energy kind '" + o.kind + "'");
  if (dk == DensityKind::Epsilon && (!(o.eps > 0.0) || !std::isfinite(o.eps)))
    throw Error(ErrorCode::BadEpsilon, "eps must be positive");
  EnergyReport r;
  int singular = 0;
  if (dk) {
    CurvatureField field = compute_curvature_field(m, nrm);
    r = dual_energy(m, field, {*dk, o.eps});
    singular = singular_vertices(field);
  } else if (o.kind == "edge-normal") {
    r = edge_energy_normal(m, nrm);
  } else {
    r = edge_energy_spherical(m, nrm);
  }
  r.principal_defect_sum = principal_defects(m, nrm).total;
  out["energy"] = report_json(r);
  out["energy"]["principal_defect_sum"] = r.principal_defect_sum;
  if (dk) {
    try {
      check_singular(singular, interior_count(m), o.max_singular, out);
    } catch (const NumericalFailure&) {
      write_json(out, o.output);
      throw;
    }
  }
  write_json(out, o.output);
}

double regular_sup(const DeviationField& d, const CurvatureField& f) {
  double s = 0.0;
  for (const auto& r : d.records)
    if (f.vertices[r.vertex].regularity.kind == Regularity::Regular) s = std::max(s, r.delta);
  return s;
}

void cmd_deviation(const Options& o, const json& cfg) {
  Loaded in = load_input(o);
  const TriMesh& m = in.mesh;
  std::vector<Vec3> nrm = choose_normals(in, o.normals, o.normals_file);
  CurvatureField field = compute_curvature_field(m, nrm);
  DeviationField d = deviation(m, field);
  json out = envelope("deviation", cfg, o);
  out["mesh"] = mesh_summary(m);
  out["sup"] = d.sup;
  out["sup_regular"] = regular_sup(d, field);
  out["delta1"] = d.delta1;
  out["delta2"] = d.delta2;
  out["skipped_vertices"] = d.skipped_vertices;
  out["skipped_cells"] = d.skipped_cells;
  json recs = json::array();
  std::ostringstream csv;
  csv << "# polarcurv " << kVersion << " schema_version=" << kSchemaVersion << " config=" << cfg.dump() << "\n";
  csv << "vertex,face,fan_triangle,delta,det_gap,dual_area,primal_area\n";
  csv << std::setprecision(17);
  for (const auto& r : d.records) {
    recs.push_back({{"vertex", r.vertex},
                    {"face", r.face},
                    {"fan_triangle", r.fan_triangle},
                    {"delta", r.delta},
                    {"det_gap", r.det_gap},
                    {"dual_area", r.dual_area},
                    {"primal_area", r.primal_area}});
    csv << r.vertex << "," << r.face << "," << r.fan_triangle << "," << r.delta << "," << r.det_gap << ","
        << r.dual_area << "," << r.primal_area << "\n";
  }
  out["records"] = recs;
  if (!o.csv.empty()) write_text(csv.str(), o.csv);
  try {
    check_singular(singular_vertices(field), interior_count(m), o.max_singular, out);
  } catch (const NumericalFailure&) {
    write_json(out, o.output);
    throw;
  }
  write_json(out, o.output);
}

struct ConvergeRow {
  double h = 0.0, max_err = 0.0, mean_err = 0.0, sup_delta = 0.0, delta1 = 0.0, delta2 = 0.0, regular_fraction = 0.0;
};

/// Max and mean Frobenius tensor error over interior Regular vertices. Paraboloids
/// are measured in the apex chart of each vertex, where the exact tensor is H.
std::pair<double, double> tensor_errors(const TriMesh& m, const ReferenceSurface& s, const CurvatureField& f) {
  double mx = 0.0, sum = 0.0;
  int count = 0;
  const Paraboloid* par = std::get_if<Paraboloid>(&s);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (m.is_boundary_vertex(v) || f.vertices[v].regularity.kind != Regularity::Regular) continue;
    std::vector<CurvatureTensorSample> samples;
    Mat2 truth;
    if (par) {
      Vec3 p = m.position(v);
      TriMesh c = paraboloid_apex_chart(par->H, Vec2(p.x(), p.y()), m);
      VertexAnalysis va = analyze_vertex(c, exact_normals(*par, c), v);
      if (va.regularity.kind != Regularity::Regular) continue;
      samples = va.samples;
      truth = par->H;
    } else {
      samples = f.vertices[v].samples;
      truth = ground_truth(s, m.position(v)).A;
    }
    for (const auto& x : samples) {
      double e = (x.A - truth).norm();
      mx = std::max(mx, e);
      sum += e;
      ++count;
    }
  }
  if (count == 0) return {std::nan(""), std::nan("")};
  return {mx, sum / count};
}

void cmd_converge(const Options& o, const json& cfg) {
  if (!o.input.empty()) throw ValidationError("converge needs an analytic --shape");
  if (o.levels < 1) throw Error(ErrorCode::InvalidParams, "--levels must be at least 1");
  if (!(o.h0 > 0.0)) throw Error(ErrorCode::InvalidParams, "--h0 must be positive");
  std::vector<ConvergeRow> rows;
  for (int k = 0; k < o.levels; ++k) {
    ShapeOptions s = o.shape;
    double h = o.h0 / std::pow(2.0, k);
    if (s.shape == "paraboloid" || s.shape == "plane") {
      s.spacing = h;
      s.grid = 2 * static_cast<int>(std::lround(0.4 / h)) + 1;
      s.offset_amp = 0.0;
    } else if (s.shape == "graph-sinsin" || s.shape == "graph-cubic") {
      s.h = h;
    } else if (s.shape == "sphere") {
      s.level = k;
    } else {
      throw ValidationError("converge supports paraboloid, plane, sphere, graph-sinsin and graph-cubic");
    }
    Loaded in = make_shape(s, o.seed);
    const TriMesh& m = in.mesh;
    if (s.shape == "sphere") {
      h = 0.0;
      for (int e = 0; e < m.num_edges(); ++e) h = std::max(h, m.edge_length(e));
    }
    std::vector<Vec3> nrm = exact_normals(*in.surface, m);
    CurvatureField f = compute_curvature_field(m, nrm);
    DeviationField d = deviation(m, f);
    ConvergeRow row;
    row.h = h;
    std::tie(row.max_err, row.mean_err) = tensor_errors(m, *in.surface, f);
    row.sup_delta = regular_sup(d, f);
    row.delta1 = d.delta1;
    row.delta2 = d.delta2;
    int regular = 0, interior = 0;
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (m.is_boundary_vertex(v) || m.is_isolated(v)) continue;
      ++interior;
      regular += f.vertices[v].regularity.kind == Regularity::Regular;
    }
    row.regular_fraction = interior ? static_cast<double>(regular) / interior : 0.0;
    rows.push_back(row);
  }
  std::ostringstream csv;
  csv << "# polarcurv " << kVersion << " schema_version=" << kSchemaVersion << " config=" << cfg.dump() << "\n";
  csv << "h,max_err,mean_err,sup_delta,delta1,delta2,regular_fraction\n";
  csv << std::setprecision(17);
  for (const auto& r : rows)
    csv << r.h << "," << r.max_err << "," << r.mean_err << "," << r.sup_delta << "," << r.delta1 << "," << r.delta2
        << "," << r.regular_fraction << "\n";
  write_text(csv.str(), o.output);
}

json lantern_case(const ShapeOptions& s, int n, int m) {
  TriMesh mesh = gen_schwarz_lantern(s.r, s.hgt, n, m);
  double area = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) area += mesh.face_area(f);
  double closed = lantern_area_closed_form(s.r, s.hgt, n, m);
  double q = static_cast<double>(m) / (static_cast<double>(n) * n);
  json rings = json::array();
  double worst = 0.0;
  for (int k = 1; k < m; ++k) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) sum += angle_defect(mesh, k * n + j);
    rings.push_back(sum);
    worst = std::max(worst, std::abs(sum));
  }
  return {{"n", n},
          {"m", m},
          {"vertices", mesh.num_vertices()},
          {"faces", mesh.num_faces()},
          {"area", area},
          {"closed_form", closed},
          {"rel_error", std::abs(area - closed) / closed},
          {"cylinder_area", 2.0 * std::numbers::pi * s.r * s.hgt},
          {"q", q},
          {"limit_at_q", lantern_area_limit(s.r, s.hgt, q)},
          {"ring_defect_sums", rings},
          {"max_abs_ring_defect_sum", worst}};
}

void cmd_lantern(const Options& o, const json& cfg) {
  json out = envelope("lantern", cfg, o);
  json cases = json::array();
  std::vector<int> ns = o.n_list.empty() ? std::vector<int>{o.shape.n} : o.n_list;
  if (o.m_rule != "fixed" && o.m_rule != "square") throw ValidationError("--m-rule must be fixed or square");
  for (int n : ns) {
    int m = o.m_rule == "fixed" ? o.shape.m : static_cast<int>(std::lround(o.q * n * n));
    cases.push_back(lantern_case(o.shape, n, m));
  }
  out["cases"] = cases;
  write_json(out, o.output);
}

void cmd_normals_fit(const Options& o, const json& cfg) {
  Loaded in = load_input(o);
  NormalField init;
  init.normals = choose_normals(in, o.init, o.init_file);
  if (o.perturb_deg != 0.0) init.normals = perturb_normals(init.normals, o.perturb_deg * std::numbers::pi / 180.0, o.seed);
  OptimizeOptions opt;
  opt.max_iter = o.max_iter;
  opt.tol = o.tol;
  if (o.objective == "delta2") opt.objective = FitObjective::Delta2;
  else if (o.objective == "delta1") opt.objective = FitObjective::Delta1;
  else if (o.objective == "sup") opt.objective = FitObjective::Sup;
  else throw ValidationError("unknown objective '" + o.objective + "'");
  OptimizeResult r = optimize_normals(in.mesh, init, opt);
  json out = envelope("normals-fit", cfg, o);
  out["mesh"] = mesh_summary(in.mesh);
  out["normals"] = to_json(r.field.normals);
  out["source"] = to_string(r.field.source);
  out["objective"] = to_string(opt.objective);
  out["iterations"] = r.field.iterations;
  out["initial_objective"] = r.field.initial_delta2;
  out["final_objective"] = r.field.final_delta2;
  out["history"] = r.history;
  out["frozen"] = r.frozen;
  out["accepted_steps"] = r.accepted_steps;
  out["rejected_steps"] = r.rejected_steps;
  out["max_rebuild_gap"] = r.max_rebuild_gap;
  out["monotone"] = r.monotone;
  write_json(out, o.output);
}

// ---------- wiring ----------

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonManifold:
    case ErrorCode::InconsistentOrientation:
    case ErrorCode::DegenerateTriangle:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::BoundaryEdge:
    case ErrorCode::BoundaryVertex:
    case ErrorCode::ParseError:
    case ErrorCode::NonTriangleFace:
    case ErrorCode::IoError:
    case ErrorCode::PointOffSurface:
    case ErrorCode::InvalidGrid:
    case ErrorCode::InvalidParams:
    case ErrorCode::InvalidDomain:
    case ErrorCode::NonUnitNormal:
    case ErrorCode::BadEpsilon:
      return kExitValidation;
    default:
      return kExitNumerical;
  }
}

void add_shape_options(CLI::App* sub, Options& o) {
  ShapeOptions& s = o.shape;
  sub->add_option("--shape", s.shape,
                  "paraboloid | plane | sphere | lantern | cube-centroid | graph-sinsin | graph-cubic");
  sub->add_option("--hxx", s.hxx, "Hessian entry H11");
  sub->add_option("--hxy", s.hxy, "Hessian entry H12");
  sub->add_option("--hyy", s.hyy, "Hessian entry H22");
  sub->add_option("--grid", s.grid, "paraboloid lattice size (odd)");
  sub->add_option("--spacing", s.spacing, "paraboloid lattice spacing");
  sub->add_option("--pattern", s.pattern, "isotropic | anisotropic");
  sub->add_option("--offset-amp", s.offset_amp, "uniform vertical vertex offsets in [-a, a]");
  sub->add_option("--level", s.level, "sphere subdivision level");
  sub->add_option("--r", s.r, "lantern radius");
  sub->add_option("--hgt", s.hgt, "lantern height");
  sub->add_option("--n", s.n, "lantern points per ring");
  sub->add_option("--m", s.m, "lantern ring count minus one");
  sub->add_option("--mesh-h", s.h, "graph mesh target edge length");
  sub->add_option("--x0", s.x0);
  sub->add_option("--x1", s.x1);
  sub->add_option("--y0", s.y0);
  sub->add_option("--y1", s.y1);
  sub->add_option("--cubic", s.cubic, "graph-cubic coefficient");
}

void add_common(CLI::App* sub, Options& o, bool with_input, bool with_normals) {
  sub->option_defaults()->always_capture_default();
  if (with_input) {
    sub->add_option("-i,--input", o.input, "input OBJ mesh");
    sub->add_option("--truth", o.truth, "ground-truth sidecar (default <input>.truth.json)");
  }
  if (with_normals) {
    sub->add_option("--normals", o.normals, "exact | area | angle | file");
    sub->add_option("--normals-file", o.normals_file, "normals JSON for --normals file");
  }
  sub->add_option("-o,--output", o.output, "output path (stdout if omitted)");
  sub->add_option("--seed", o.seed, "random seed");
  sub->add_option("--max-singular-fraction", o.max_singular, "interior fraction of singular systems tolerated");
  sub->add_flag("--no-timestamp", o.no_timestamp, "omit the timestamp field");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polarcurv: discrete curvature via polar duality"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "generate a mesh (OBJ) and its ground-truth sidecar");
  add_common(gen, o, false, false);
  add_shape_options(gen, o);

  auto* dual = app.add_subcommand("dual", "dual faces, dual vertices and dual edges");
  add_common(dual, o, true, true);
  add_shape_options(dual, o);

  auto* curv = app.add_subcommand("curv", "regularity, curvature tensors, angle defects, loop summaries");
  add_common(curv, o, true, true);
  add_shape_options(curv, o);

  auto* energy = app.add_subcommand("energy", "bending energies");
  add_common(energy, o, true, true);
  add_shape_options(energy, o);
  energy->add_option("--kind", o.kind, "e1 | e2 | eps | willmore | edge-normal | edge-spherical");
  energy->add_option("--eps", o.eps, "epsilon for --kind eps");

  auto* dev = app.add_subcommand("deviation", "primal/dual curvature deviation");
  add_common(dev, o, true, true);
  add_shape_options(dev, o);
  dev->add_option("--csv", o.csv, "also write cell records as CSV");

  auto* conv = app.add_subcommand("converge", "refinement sweep table (CSV)");
  add_common(conv, o, false, false);
  add_shape_options(conv, o);
  conv->add_option("--levels", o.levels, "number of refinement levels");
  conv->add_option("--h0", o.h0, "coarsest mesh size; halved per level");

  auto* lan = app.add_subcommand("lantern", "Schwarz lantern areas and ring angle defects");
  add_common(lan, o, false, false);
  lan->add_option("--r", o.shape.r, "radius");
  lan->add_option("--hgt", o.shape.hgt, "height");
  lan->add_option("--n", o.shape.n, "points per ring");
  lan->add_option("--m", o.shape.m, "ring count minus one (fixed rule)");
  lan->add_option("--n-list", o.n_list, "sweep over these n")->delimiter(',');
  lan->add_option("--m-rule", o.m_rule, "fixed | square (m = q n^2)");
  lan->add_option("--q", o.q, "ratio for the square rule");

  auto* fit = app.add_subcommand("normals-fit", "optimise vertex normals against the deviation");
  add_common(fit, o, true, false);
  add_shape_options(fit, o);
  fit->add_option("--init", o.init, "area | angle | file | exact");
  fit->add_option("--init-file", o.init_file, "normals JSON for --init file");
  fit->add_option("--perturb-deg", o.perturb_deg, "rotate the initial normals by this angle (random axes)");
  fit->add_option("--max-iter", o.max_iter, "sweep limit");
  fit->add_option("--tol", o.tol, "relative decrease stop threshold");
  fit->add_option("--objective", o.objective, "delta2 | delta1 | sup");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    json cfg = config_json(*sub);
    cfg["subcommand"] = name;
    if (name == "gen") cmd_gen(o, cfg);
    else if (name == "dual") cmd_dual(o, cfg);
    else if (name == "curv") cmd_curv(o, cfg);
    else if (name == "energy") cmd_energy(o, cfg);
    else if (name == "deviation") cmd_deviation(o, cfg);
    else if (name == "converge") cmd_converge(o, cfg);
    else if (name == "lantern") cmd_lantern(o, cfg);
    else if (name == "normals-fit") cmd_normals_fit(o, cfg);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
