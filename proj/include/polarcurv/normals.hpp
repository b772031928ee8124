#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "polarcurv/mesh.hpp"

namespace polarcurv {

enum class NormalWeighting { Area, Angle };

enum class NormalSource { Exact, AreaWeighted, AngleWeighted, Optimized, File };

inline const char* to_string(NormalSource s) {
  switch (s) {
    case NormalSource::Exact: return "exact";
    case NormalSource::AreaWeighted: return "area-weighted";
    case NormalSource::AngleWeighted: return "angle-weighted";
    case NormalSource::Optimized: return "optimized";
    case NormalSource::File: return "file";
  }
  return "?";
}

struct NormalField {
  std::vector<Vec3> normals;
  NormalSource source = NormalSource::Exact;
  int iterations = 0;
  double initial_delta2 = 0.0;
  double final_delta2 = 0.0;
};

/// Normalised weighted sum of incident unit face normals (weights: face area or the
/// corner angle at the vertex).
inline NormalField heuristic_normals(const TriMesh& mesh, NormalWeighting weighting) {
  NormalField out;
  out.source = weighting == NormalWeighting::Area ? NormalSource::AreaWeighted : NormalSource::AngleWeighted;
  out.normals.assign(mesh.num_vertices(), Vec3::Zero());
  std::vector<double> weight(mesh.num_vertices(), 0.0);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    Vec3 n = mesh.face_normal(f);
    for (int v : mesh.triangle(f)) {
      double w = weighting == NormalWeighting::Area ? mesh.face_area(f) : corner_angle(mesh, f, v);
      out.normals[v] += w * n;
      weight[v] += w;
    }
  }
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    double len = out.normals[v].norm();
    if (!(len > 1e-12 * weight[v]) || weight[v] == 0.0)
      throw Error(ErrorCode::ZeroAccumulation, "face normals cancel at vertex " + std::to_string(v));
    out.normals[v] /= len;
  }
  return out;
}

/// Rotates every normal by `angle` radians about a random tangent axis.
inline std::vector<Vec3> perturb_normals(const std::vector<Vec3>& normals, double angle, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  std::vector<Vec3> out;
  out.reserve(normals.size());
  for (const Vec3& n : normals) {
    auto [e1, e2] = tangent_basis(n);
    double t = u(rng);
    Vec3 axis = std::cos(t) * e1 + std::sin(t) * e2;
    out.push_back((Eigen::AngleAxisd(angle, axis) * n).normalized());
  }
  return out;
}

}  // namespace polarcurv
