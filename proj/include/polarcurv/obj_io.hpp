#pragma once

// Minimal Wavefront OBJ subset: `v x y z` and triangular `f a b c` records with
// 1-based (or negative, relative) indices. `f a/t/n` forms keep only the vertex
// index. vt/vn/g/o/s/usemtl/mtllib records are skipped with a warning.

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "polarcurv/mesh.hpp"

namespace polarcurv {

inline TriMesh read_obj(std::istream& in, std::vector<std::string>* warnings = nullptr) {
  std::vector<Vec3> positions;
  std::vector<Triangle> triangles;
  std::string line;
  int line_no = 0;
  bool warned_attrs = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z))
        throw Error(ErrorCode::ParseError, "malformed vertex record at line " + std::to_string(line_no),
                    line_no, 1);
      positions.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      int column = 2;
      while (ls >> tok) {
        std::string head = tok.substr(0, tok.find('/'));
        int value = 0;
        try {
          std::size_t used = 0;
          value = std::stoi(head, &used);
          if (used != head.size()) throw std::invalid_argument(head);
        } catch (const std::exception&) {
          throw Error(ErrorCode::ParseError,
                      "bad face index '" + tok + "' at line " + std::to_string(line_no), line_no, column);
        }
        if (value == 0)
          throw Error(ErrorCode::ParseError, "face index 0 at line " + std::to_string(line_no), line_no,
                      column);
        int resolved = value > 0 ? value - 1 : static_cast<int>(positions.size()) + value;
        idx.push_back(resolved);
        column += static_cast<int>(tok.size()) + 1;
      }
      if (idx.size() != 3)
        throw Error(ErrorCode::NonTriangleFace,
                    "face with " + std::to_string(idx.size()) + " vertices at line " + std::to_string(line_no),
                    line_no, 1);
      triangles.push_back({idx[0], idx[1], idx[2]});
    } else {
      if (warnings && !warned_attrs) {
        warnings->push_back("ignoring '" + tag + "' records (first at line " + std::to_string(line_no) + ")");
        warned_attrs = true;
      }
    }
  }
  return build_mesh(std::move(positions), std::move(triangles));
}

inline TriMesh load_obj(const std::string& path, std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return read_obj(in, warnings);
}

inline void write_obj(std::ostream& out, const TriMesh& mesh) {
  out << std::setprecision(17);
  for (const auto& p : mesh.positions()) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const auto& t : mesh.triangles()) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

inline void save_obj(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  write_obj(out, mesh);
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

}  // namespace polarcurv
