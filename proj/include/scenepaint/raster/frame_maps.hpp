#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "scenepaint/scenegraph/geometry.hpp"

namespace scenepaint {

/// Per-view rasterizer output, row-major with pixel index y * width + x.
/// A pixel is covered iff its label is >= 1; uncovered pixels have infinite
/// depth and zero coordinates.
struct FrameMaps {
  int width = 0;
  int height = 0;
  int class_count = 0;
  std::vector<std::int16_t> label;
  std::vector<float> depth;
  /// World coordinates, 3 floats per pixel.
  std::vector<float> coord;

  FrameMaps() = default;
  FrameMaps(int w, int h, int classes)
      : width(w),
        height(h),
        class_count(classes),
        label(static_cast<std::size_t>(w) * h, 0),
        depth(static_cast<std::size_t>(w) * h, std::numeric_limits<float>::infinity()),
        coord(static_cast<std::size_t>(w) * h * 3, 0.0f) {}

  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width) * height; }
  std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * width + x; }
  bool covered(std::size_t i) const noexcept { return label[i] >= 1; }

  Vec3 world(std::size_t i) const { return {coord[3 * i], coord[3 * i + 1], coord[3 * i + 2]}; }

  std::size_t covered_count() const {
    std::size_t n = 0;
    for (auto l : label) n += l >= 1;
    return n;
  }

  bool fully_covered() const { return covered_count() == pixel_count(); }

  float max_depth() const {
    float m = 0.0f;
    for (std::size_t i = 0; i < pixel_count(); ++i) {
      if (covered(i) && depth[i] > m) m = depth[i];
    }
    return m;
  }

  bool operator==(const FrameMaps&) const = default;
};

}  // namespace scenepaint
