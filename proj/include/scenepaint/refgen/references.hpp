#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "scenepaint/core/error.hpp"
#include "scenepaint/core/image.hpp"
#include "scenepaint/core/random.hpp"
#include "scenepaint/raster/frame_maps.hpp"
#include "scenepaint/scenegraph/style.hpp"

namespace scenepaint {

/// Per-class linear maps P_c (3 x dim_z), entries N(0, 1/dim_z).
class MockPalette {
 public:
  static MockPalette make(std::uint64_t seed, int classes, std::size_t style_dim) {
    if (classes < 1 || style_dim < 1) throw ValidationError("mock palette needs classes >= 1 and style_dim >= 1");
    MockPalette p;
    p.dim_ = style_dim;
    p.seed_ = seed;
    Rng rng(mix_seed(seed, 0xa1));
    const double sd = 1.0 / std::sqrt(static_cast<double>(style_dim));
    p.rows_.resize(static_cast<std::size_t>(classes) * 3 * style_dim);
    for (auto& v : p.rows_) v = sd * rng.normal();
    return p;
  }

  int classes() const { return static_cast<int>(rows_.size() / (3 * dim_)); }
  std::size_t style_dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }

  /// 0.5 + 0.5 tanh(P_c z) for class id c in [1, C].
  std::array<double, 3> base_color(int class_id, const StyleVector& z) const {
    if (z.dim() != dim_) {
      throw ValidationError("style dimension " + std::to_string(z.dim()) + " does not match mock palette dimension " +
                            std::to_string(dim_));
    }
    if (class_id < 1 || class_id > classes()) throw ValidationError("class id out of palette range");
    std::array<double, 3> out{};
    for (int ch = 0; ch < 3; ++ch) {
      const double* row = rows_.data() + (static_cast<std::size_t>(class_id - 1) * 3 + ch) * dim_;
      double acc = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) acc += row[k] * z.z[k];
      out[ch] = 0.5 + 0.5 * std::tanh(acc);
    }
    return out;
  }

 private:
  std::vector<double> rows_;
  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
};

struct MockReferenceOptions {
  std::uint64_t palette_seed = 7;
  double epsilon = 0.2;
  bool shading = true;
};

/// The per-class color offsets injected into one (view, style) reference,
/// index class_id - 1, each channel uniform in [-epsilon, epsilon].
inline std::vector<std::array<double, 3>> mock_offsets(int classes, std::uint64_t view_seed, std::size_t style_index,
                                                       double epsilon) {
  std::vector<std::array<double, 3>> out(static_cast<std::size_t>(classes));
  Rng rng(mix_seed(view_seed, style_index));
  for (auto& o : out) {
    for (auto& v : o) v = rng.uniform(-epsilon, epsilon);
  }
  return out;
}

/// Shading factor 0.7 + 0.3 (1 - depth / max_depth).
inline double depth_shade(double depth, double max_depth) {
  return max_depth > 0.0 ? 0.7 + 0.3 * (1.0 - depth / max_depth) : 1.0;
}

/// Procedural stand-in for a semantic image synthesis network.
inline Image mock_reference(const FrameMaps& frames, const StyleVector& z, const MockPalette& palette,
                            std::uint64_t view_seed, std::size_t style_index, double epsilon, bool shading = true) {
  if (!(epsilon >= 0.0)) throw ValidationError("mock inconsistency amplitude must be >= 0");
  if (frames.class_count > palette.classes()) throw ValidationError("frames have more classes than the mock palette");
  const auto offsets = mock_offsets(palette.classes(), view_seed, style_index, epsilon);
  std::vector<std::array<double, 3>> base(static_cast<std::size_t>(palette.classes()));
  for (int c = 1; c <= palette.classes(); ++c) base[static_cast<std::size_t>(c - 1)] = palette.base_color(c, z);
  const double max_depth = frames.max_depth();
  Image img(frames.width, frames.height);
  for (std::size_t i = 0; i < frames.pixel_count(); ++i) {
    if (!frames.covered(i)) continue;
    const auto c = static_cast<std::size_t>(frames.label[i] - 1);
    const double shade = shading ? depth_shade(frames.depth[i], max_depth) : 1.0;
    for (int ch = 0; ch < 3; ++ch) {
      img.at(i, ch) = static_cast<float>(std::clamp(base[c][ch] * shade + offsets[c][ch], 0.0, 1.0));
    }
  }
  return img;
}

/// Seed of the per-view perturbation stream for view `v`.
inline std::uint64_t mock_view_seed(std::uint64_t palette_seed, std::size_t view) { return mix_seed(palette_seed ^ 0x5eedULL, view); }

inline std::string reference_name(std::size_t view, std::size_t style) {
  return "view" + std::to_string(view) + "_style" + std::to_string(style) + ".png";
}

/// Reference images keyed by (view index, style index).
struct ReferenceSet {
  std::map<std::pair<std::size_t, std::size_t>, Image> images;
  std::string provenance;  // "mock" or "external"
  MockReferenceOptions mock;  // meaningful for mock provenance only

  const Image& at(std::size_t view, std::size_t style) const {
    auto it = images.find({view, style});
    if (it == images.end()) throw ValidationError("missing reference pair " + reference_name(view, style));
    return it->second;
  }

  void require(const std::vector<std::size_t>& views, const std::vector<std::size_t>& styles, int width,
               int height) const {
    for (auto v : views) {
      for (auto s : styles) {
        const auto& img = at(v, s);
        if (img.width != width || img.height != height) {
          throw ValidationError("reference " + reference_name(v, s) + " is " + std::to_string(img.width) + "x" +
                                std::to_string(img.height) + ", expected " + std::to_string(width) + "x" +
                                std::to_string(height));
        }
      }
    }
  }
};

inline ReferenceSet make_mock_references(const std::vector<FrameMaps>& frames, const std::vector<StyleVector>& styles,
                                         const MockReferenceOptions& options) {
  if (frames.empty()) throw ValidationError("no views to generate references for");
  validate_styles(styles);
  const auto palette = MockPalette::make(options.palette_seed, frames.front().class_count, styles.front().dim());
  ReferenceSet set;
  set.provenance = "mock";
  set.mock = options;
  for (std::size_t v = 0; v < frames.size(); ++v) {
    for (std::size_t s = 0; s < styles.size(); ++s) {
      set.images[{v, s}] = mock_reference(frames[v], styles[s], palette, mock_view_seed(options.palette_seed, v), s,
                                          options.epsilon, options.shading);
    }
  }
  return set;
}

/// Reads view{v}_style{s}.png for every requested pair.
inline ReferenceSet load_reference_dir(const std::filesystem::path& dir, std::size_t views, std::size_t styles,
                                       int width, int height) {
  ReferenceSet set;
  set.provenance = "external";
  for (std::size_t v = 0; v < views; ++v) {
    for (std::size_t s = 0; s < styles; ++s) {
      const auto path = dir / reference_name(v, s);
      if (!std::filesystem::exists(path)) {
        throw ValidationError("missing reference pair " + reference_name(v, s) + " in " + dir.string());
      }
      set.images[{v, s}] = read_png(path);
    }
  }
  std::vector<std::size_t> vi(views), si(styles);
  for (std::size_t i = 0; i < views; ++i) vi[i] = i;
  for (std::size_t i = 0; i < styles; ++i) si[i] = i;
  set.require(vi, si, width, height);
  return set;
}

inline void save_reference_dir(const ReferenceSet& set, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [key, img] : set.images) write_png(img, dir / reference_name(key.first, key.second));
}

}  // namespace scenepaint
