#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "scenepaint/core/error.hpp"
#include "scenepaint/core/text_io.hpp"
#include "scenepaint/scenegraph/geometry.hpp"

namespace scenepaint {

/// Indexed triangle mesh in object space.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool operator==(const Mesh&) const = default;
};

inline bool is_degenerate(const Vec3& a, const Vec3& b, const Vec3& c) {
  return (b - a).cross(c - a).squaredNorm() <= 1e-24;
}

inline std::size_t count_valid_triangles(const Mesh& mesh) {
  std::size_t n = 0;
  for (const auto& t : mesh.triangles) {
    if (!is_degenerate(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]])) ++n;
  }
  return n;
}

/// Axis-aligned box with outward-facing triangles.
inline Mesh make_box(const Vec3& lo, const Vec3& hi) {
  Mesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(), (i & 4) ? hi.z() : lo.z());
  }
  // quads as (a, b, c, d) counter-clockwise seen from outside
  const int quads[6][4] = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
  for (const auto& q : quads) {
    m.triangles.push_back({q[0], q[1], q[2]});
    m.triangles.push_back({q[0], q[2], q[3]});
  }
  return m;
}

/// Appends `other` to `mesh`, offsetting indices.
inline void append_mesh(Mesh& mesh, const Mesh& other) {
  const int base = static_cast<int>(mesh.vertices.size());
  mesh.vertices.insert(mesh.vertices.end(), other.vertices.begin(), other.vertices.end());
  for (const auto& t : other.triangles) mesh.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
}

/// Reads the `v` and `f` records of a Wavefront OBJ file. Polygons are fan
/// triangulated; texture/normal indices and other records are ignored.
inline Mesh parse_obj(const std::string& name, std::string_view content) {
  Mesh mesh;
  std::size_t start = 0;
  std::size_t number = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    ++number;
    std::string_view line = content.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto tokens = TextReader::tokenize(line);
    if (tokens.empty() || tokens[0][0] == '#') continue;
    TextLine tl{number, tokens};
    TextReader helper(name, "");
    if (tokens[0] == "v") {
      if (tokens.size() < 4) throw ParseError(name, number, "vertex needs 3 coordinates");
      mesh.vertices.emplace_back(helper.parse_double(tl, 1), helper.parse_double(tl, 2), helper.parse_double(tl, 3));
    } else if (tokens[0] == "f") {
      if (tokens.size() < 4) throw ParseError(name, number, "face needs at least 3 vertices");
      std::vector<int> idx;
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        const std::string head = tokens[i].substr(0, tokens[i].find('/'));
        TextLine one{number, {head}};
        int v = helper.parse_int(one, 0);
        if (v < 0) v = static_cast<int>(mesh.vertices.size()) + v + 1;
        if (v < 1 || v > static_cast<int>(mesh.vertices.size())) {
          throw ParseError(name, number, "face index out of range: " + tokens[i]);
        }
        idx.push_back(v - 1);
      }
      for (std::size_t i = 1; i + 1 < idx.size(); ++i) mesh.triangles.push_back({idx[0], idx[i], idx[i + 1]});
    }
  }
  return mesh;
}

inline Mesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing mesh file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_obj(path.string(), ss.str());
}

inline std::string format_obj(const Mesh& mesh) {
  std::string out;
  for (const auto& v : mesh.vertices) {
    out += "v " + format_number(v.x()) + " " + format_number(v.y()) + " " + format_number(v.z()) + "\n";
  }
  for (const auto& t : mesh.triangles) {
    out += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " + std::to_string(t[2] + 1) + "\n";
  }
  return out;
}

inline void save_obj(const Mesh& mesh, const std::filesystem::path& path) { write_text_file(path, format_obj(mesh)); }

}  // namespace scenepaint
