#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "scenepaint/core/binary_io.hpp"
#include "scenepaint/core/image.hpp"
#include "scenepaint/raster/frame_maps.hpp"

namespace scenepaint {

// FrameMaps container, little-endian:
//   "SPFM" | u32 version (1) | u32 W | u32 H | u32 C
//   | W*H  i16 label | W*H f32 depth | W*H*3 f32 coord   (all row-major)

inline constexpr std::uint32_t kFrameFormatVersion = 1;

inline std::string encode_frames(const FrameMaps& f) {
  BinaryWriter w;
  w.bytes("SPFM");
  w.u32(kFrameFormatVersion);
  w.u32(static_cast<std::uint32_t>(f.width));
  w.u32(static_cast<std::uint32_t>(f.height));
  w.u32(static_cast<std::uint32_t>(f.class_count));
  for (auto l : f.label) w.i16(l);
  for (float d : f.depth) w.f32(d);
  for (float c : f.coord) w.f32(c);
  return w.take();
}

inline FrameMaps decode_frames(std::string_view bytes) {
  BinaryReader r(bytes);
  if (r.bytes(4) != "SPFM") throw CorruptDataError("not a frame-maps file");
  const auto version = r.u32();
  if (version != kFrameFormatVersion) throw CorruptDataError("unsupported frame-maps version " + std::to_string(version));
  const auto w = r.u32();
  const auto h = r.u32();
  const auto c = r.u32();
  if (w == 0 || h == 0 || w > 1u << 15 || h > 1u << 15) throw CorruptDataError("implausible frame dimensions");
  if (r.remaining() != static_cast<std::size_t>(w) * h * (2 + 4 + 12)) throw CorruptDataError("frame payload size mismatch");
  FrameMaps f(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
  for (auto& l : f.label) l = r.i16();
  for (auto& d : f.depth) d = r.f32();
  for (auto& v : f.coord) v = r.f32();
  return f;
}

inline void save_frames(const FrameMaps& f, const std::filesystem::path& path) { write_file_bytes(path, encode_frames(f)); }

inline FrameMaps load_frames(const std::filesystem::path& path) { return decode_frames(read_file_bytes(path)); }

/// Deterministic, well-spread preview color for a class id; black for 0.
inline std::array<float, 3> class_palette_color(int class_id) {
  if (class_id <= 0) return {0.0f, 0.0f, 0.0f};
  // golden-angle hue walk with alternating value
  const double hue = std::fmod(class_id * 0.618033988749895, 1.0) * 6.0;
  const double value = (class_id % 2) ? 0.95 : 0.7;
  const double sat = 0.65;
  const int sector = static_cast<int>(hue) % 6;
  const double f = hue - std::floor(hue);
  const double p = value * (1 - sat), q = value * (1 - sat * f), t = value * (1 - sat * (1 - f));
  double r = 0, g = 0, b = 0;
  switch (sector) {
    case 0: r = value, g = t, b = p; break;
    case 1: r = q, g = value, b = p; break;
    case 2: r = p, g = value, b = t; break;
    case 3: r = p, g = q, b = value; break;
    case 4: r = t, g = p, b = value; break;
    default: r = value, g = p, b = q; break;
  }
  return {static_cast<float>(r), static_cast<float>(g), static_cast<float>(b)};
}

inline Image label_preview(const FrameMaps& f) {
  Image img(f.width, f.height);
  for (std::size_t i = 0; i < f.pixel_count(); ++i) {
    const auto c = class_palette_color(f.label[i]);
    for (int k = 0; k < 3; ++k) img.at(i, k) = c[k];
  }
  return img;
}

/// Near is bright, far is dark, uncovered is black.
inline Image depth_preview(const FrameMaps& f) {
  Image img(f.width, f.height);
  const float max_d = f.max_depth();
  if (max_d <= 0.0f) return img;
  for (std::size_t i = 0; i < f.pixel_count(); ++i) {
    if (!f.covered(i)) continue;
    const float g = 1.0f - 0.85f * f.depth[i] / max_d;
    for (int k = 0; k < 3; ++k) img.at(i, k) = g;
  }
  return img;
}

}  // namespace scenepaint
