#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "scenepaint/core/error.hpp"
#include "scenepaint/core/text_io.hpp"
#include "scenepaint/painter/generator.hpp"
#include "scenepaint/raster/projection.hpp"
#include "scenepaint/raster/rasterizer.hpp"

namespace scenepaint {

struct ColoredMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<float, 3>> colors;
  std::vector<std::uint32_t> samples;  // 0 marks an unpainted vertex
  std::vector<int> class_id;

  std::size_t unpainted() const {
    std::size_t n = 0;
    for (auto s : samples) n += s == 0;
    return n;
  }
};

enum class BakeSampling {
  /// Point evaluation for per-pixel painters, bilinear for convolutional ones.
  automatic,
  /// Bilinear lookup in each painted view.
  bilinear,
  /// Paint the vertex itself; valid only for per-pixel painters.
  point,
};

struct BakeOptions {
  double tau = 0.01;
  BakeSampling sampling = BakeSampling::automatic;
  RasterOptions raster;
};

struct BakeResult {
  ColoredMesh mesh;
  std::vector<std::string> warnings;
};

/// Pixels around a projected vertex that see it: the (up to) four pixels
/// whose centers surround the projection, kept when they are covered, carry
/// the vertex's class and store a depth within tau (relative) of the
/// vertex depth. Weights are the bilinear weights of the kept pixels. If any
/// of the four pixels shows a surface more than tau in front of the vertex,
/// the vertex counts as hidden and gets no sample.
struct VertexSamples {
  std::array<std::size_t, 4> pixel{};
  std::array<double, 4> weight{};
  int count = 0;
};

inline VertexSamples visible_samples(const Vec3& p, int class_id, const Camera& cam, const FrameMaps& f, double tau) {
  VertexSamples out;
  const Vec3 c = cam.rotation().transpose() * (p - cam.center());
  if (!(c.z() > 0.0)) return out;
  const auto pr = project(p, cam);
  const double gx = pr.pixel.x() - 0.5, gy = pr.pixel.y() - 0.5;
  if (!(gx > -1.0 && gy > -1.0 && gx < f.width && gy < f.height)) return out;
  const int x0 = static_cast<int>(std::floor(gx)), y0 = static_cast<int>(std::floor(gy));
  const double tx = gx - x0, ty = gy - y0;
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      const int x = x0 + dx, y = y0 + dy;
      if (x < 0 || y < 0 || x >= f.width || y >= f.height) continue;
      const auto i = f.index(x, y);
      if (!f.covered(i)) continue;
      const double d = f.depth[i];
      if (d < pr.depth - tau * pr.depth) return VertexSamples{};
      if (f.label[i] != class_id || std::abs(pr.depth - d) > tau * d) continue;
      out.pixel[out.count] = i;
      out.weight[out.count] = (dx ? tx : 1.0 - tx) * (dy ? ty : 1.0 - ty);
      ++out.count;
    }
  }
  return out;
}

/// Back-projects painted views onto the scene's vertices. Each vertex gets
/// the mean of its samples over all cameras where it is visible; vertices
/// seen by no camera get the painter's palette color for their class. With
/// point sampling every visible view contributes the painter's color at the
/// vertex itself.
template <typename T>
BakeResult bake(const Scene& scene, const PaintingGenerator<T>& gen, const std::vector<Camera>& cameras,
                const StyleVector& z, const BakeOptions& options = {}) {
  if (cameras.empty()) throw ValidationError("bake needs at least one camera");
  if (!(options.tau > 0.0)) throw ValidationError("bake visibility tolerance must be positive");
  const double tol = 1e-9 * gen.bounds.extent().norm();
  if (!gen.bounds.contains(scene.bounds(), tol)) {
    throw ValidationError("scene bounds are not inside the painter's training bounds; retrain after moving geometry");
  }
  if (scene.class_count() != gen.config.classes) {
    throw ValidationError("scene has " + std::to_string(scene.class_count()) + " classes, painter expects " +
                          std::to_string(gen.config.classes));
  }
  gen.check_view(FrameMaps(1, 1, gen.config.classes), z);
  BakeSampling sampling = options.sampling;
  const bool per_pixel = gen.config.kernel() == 1;
  if (sampling == BakeSampling::automatic) sampling = per_pixel ? BakeSampling::point : BakeSampling::bilinear;
  if (sampling == BakeSampling::point && !per_pixel) {
    throw ValidationError("point sampling needs a per-pixel painter (kernel size 1)");
  }

  BakeResult result;
  auto& mesh = result.mesh;
  for (std::size_t o = 0; o < scene.objects().size(); ++o) {
    const int base = static_cast<int>(mesh.vertices.size());
    for (const auto& v : scene.world_vertices(o)) {
      mesh.vertices.push_back(v);
      mesh.class_id.push_back(scene.objects()[o].class_id);
    }
    for (const auto& t : scene.mesh_of(scene.objects()[o]).triangles) {
      mesh.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
    }
  }
  const std::size_t nv = mesh.vertices.size();
  std::vector<std::array<double, 3>> sums(nv, {0, 0, 0});
  mesh.samples.assign(nv, 0);

  std::vector<std::array<float, 3>> point_colors;
  if (sampling == BakeSampling::point) {
    FrameMaps pts(static_cast<int>(nv), 1, gen.config.classes);
    for (std::size_t i = 0; i < nv; ++i) {
      pts.label[i] = static_cast<std::int16_t>(mesh.class_id[i]);
      pts.depth[i] = 1.0f;
      for (int k = 0; k < 3; ++k) pts.coord[3 * i + k] = static_cast<float>(mesh.vertices[i][k]);
    }
    const Image img = paint_view(gen, pts, z);
    point_colors.resize(nv);
    for (std::size_t i = 0; i < nv; ++i) point_colors[i] = {img.at(i, 0), img.at(i, 1), img.at(i, 2)};
  }

  std::size_t holes = 0;
  for (const auto& cam : cameras) {
    const FrameMaps f = rasterize_view(scene, cam, options.raster);
    if (!f.fully_covered()) ++holes;
    Image img;
    if (sampling == BakeSampling::bilinear) img = paint_view(gen, f, z, true);
    for (std::size_t i = 0; i < nv; ++i) {
      const auto vs = visible_samples(mesh.vertices[i], mesh.class_id[i], cam, f, options.tau);
      if (vs.count == 0) continue;
      ++mesh.samples[i];
      if (sampling == BakeSampling::point) continue;
      double wsum = 0.0;
      std::array<double, 3> acc{0, 0, 0};
      for (int k = 0; k < vs.count; ++k) {
        for (int ch = 0; ch < 3; ++ch) acc[ch] += vs.weight[k] * img.at(vs.pixel[k], ch);
        wsum += vs.weight[k];
      }
      for (int ch = 0; ch < 3; ++ch) {
        // a vertex exactly on a pixel center has zero weight on its neighbors
        sums[i][ch] += wsum > 0.0 ? acc[ch] / wsum : img.at(vs.pixel[0], ch);
      }
    }
  }
  if (holes > 0) result.warnings.push_back(std::to_string(holes) + " camera(s) see uncovered background pixels");

  mesh.colors.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (mesh.samples[i] == 0) {
      mesh.colors[i] = gen.palette.at(static_cast<std::size_t>(mesh.class_id[i] - 1));
      continue;
    }
    if (sampling == BakeSampling::point) {
      mesh.colors[i] = point_colors[i];  // every sample is this exact value
      continue;
    }
    for (int ch = 0; ch < 3; ++ch) {
      mesh.colors[i][ch] = static_cast<float>(sums[i][ch] / static_cast<double>(mesh.samples[i]));
    }
  }
  if (mesh.unpainted() > 0) {
    result.warnings.push_back(std::to_string(mesh.unpainted()) + " of " + std::to_string(nv) +
                              " vertices are visible in no camera and use the class fallback color");
  }
  return result;
}

/// ASCII PLY: vertex x y z (float), red green blue (uchar), samples (uint);
/// faces as vertex_indices lists.
inline std::string format_ply(const ColoredMesh& mesh) {
  if (mesh.vertices.empty()) throw ValidationError("cannot export an empty mesh");
  if (mesh.colors.size() != mesh.vertices.size() || mesh.samples.size() != mesh.vertices.size()) {
    throw ValidationError("mesh colors or sample counts do not match its vertices");
  }
  std::string out = "ply\nformat ascii 1.0\ncomment scenepaint baked vertex colors\n";
  out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  out += "property uchar red\nproperty uchar green\nproperty uchar blue\nproperty uint samples\n";
  out += "element face " + std::to_string(mesh.triangles.size()) + "\n";
  out += "property list uchar int vertex_indices\nend_header\n";
  char buf[64];
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      std::snprintf(buf, sizeof buf, "%.9g ", static_cast<double>(static_cast<float>(mesh.vertices[i][k])));
      out += buf;
    }
    for (int ch = 0; ch < 3; ++ch) out += std::to_string(to_byte(mesh.colors[i][ch])) + " ";
    out += std::to_string(mesh.samples[i]) + "\n";
  }
  for (const auto& t : mesh.triangles) {
    out += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  }
  return out;
}

inline void export_ply(const ColoredMesh& mesh, const std::filesystem::path& path) {
  write_text_file(path, format_ply(mesh));
}

/// Reads files written by format_ply.
inline ColoredMesh parse_ply(const std::string& name, std::string_view content) {
  TextReader reader(name, content);
  ColoredMesh mesh;
  std::size_t nv = 0, nf = 0;
  const TextLine* line = reader.next();
  if (!line || line->tokens.empty() || line->tokens[0] != "ply") throw ParseError(name, 1, "missing 'ply' magic");
  while ((line = reader.next())) {
    const auto& t = line->tokens;
    if (t[0] == "end_header") break;
    if (t[0] == "element" && t.size() == 3) {
      const auto n = static_cast<std::size_t>(reader.parse_int(*line, 2));
      (t[1] == "vertex" ? nv : nf) = n;
    }
  }
  if (!line) throw ParseError(name, 0, "missing end_header");
  for (std::size_t i = 0; i < nv; ++i) {
    line = reader.next();
    if (!line || line->tokens.size() != 7) throw ParseError(name, line ? line->number : 0, "bad vertex record");
    mesh.vertices.emplace_back(reader.parse_double(*line, 0), reader.parse_double(*line, 1),
                               reader.parse_double(*line, 2));
    mesh.colors.push_back({static_cast<float>(reader.parse_int(*line, 3)) / 255.0f,
                           static_cast<float>(reader.parse_int(*line, 4)) / 255.0f,
                           static_cast<float>(reader.parse_int(*line, 5)) / 255.0f});
    mesh.samples.push_back(static_cast<std::uint32_t>(reader.parse_int(*line, 6)));
  }
  for (std::size_t i = 0; i < nf; ++i) {
    line = reader.next();
    if (!line || line->tokens.size() != 4 || line->tokens[0] != "3") {
      throw ParseError(name, line ? line->number : 0, "bad face record (triangles only)");
    }
    mesh.triangles.push_back({reader.parse_int(*line, 1), reader.parse_int(*line, 2), reader.parse_int(*line, 3)});
  }
  return mesh;
}

inline ColoredMesh import_ply(const std::filesystem::path& path) { return parse_ply(path.string(), read_text(path)); }

}  // namespace scenepaint
