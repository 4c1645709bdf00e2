#pragma once

#include <filesystem>
#include <string>

#include "scenepaint/core/binary_io.hpp"
#include "scenepaint/painter/generator.hpp"

namespace scenepaint {

// Layout (little-endian):
//   "SPCK" u32 version
//   config block, bounds (6 f64), styles (u32 count, u32 dim, f64 values),
//   palette (u32 count, 3 f32 each)
//   u32 tensor count, then per tensor: u32 rank, u64 dims..., f32 array
//   u64 FNV-1a hash of everything before it
inline constexpr char kCheckpointMagic[4] = {'S', 'P', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_config(BinaryWriter& w, const GeneratorConfig& c) {
  w.u8(static_cast<std::uint8_t>(c.kind));
  w.i32(c.layers);
  w.i32(c.hidden);
  w.f64(c.slope);
  w.u8(static_cast<std::uint8_t>(c.positional));
  w.i32(c.frequencies);
  w.i32(c.fourier_features);
  w.u64(c.fourier_seed);
  w.i32(c.ne_dim);
  w.i32(c.ne_hidden);
  w.i32(c.style_dim);
  w.i32(c.classes);
}

inline GeneratorConfig read_config(BinaryReader& r) {
  GeneratorConfig c;
  const auto kind = r.u8();
  if (kind > 1) throw CorruptDataError("checkpoint: bad generator kind");
  c.kind = static_cast<GeneratorKind>(kind);
  c.layers = r.i32();
  c.hidden = r.i32();
  c.slope = r.f64();
  const auto pe = r.u8();
  if (pe > 2) throw CorruptDataError("checkpoint: bad positional encoding kind");
  c.positional = static_cast<PositionalKind>(pe);
  c.frequencies = r.i32();
  c.fourier_features = r.i32();
  c.fourier_seed = r.u64();
  c.ne_dim = r.i32();
  c.ne_hidden = r.i32();
  c.style_dim = r.i32();
  c.classes = r.i32();
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw CorruptDataError(std::string("checkpoint: ") + e.what());
  }
  return c;
}

template <typename T>
void write_tensor(BinaryWriter& w, const nn::Tensor<T>& t) {
  w.u32(static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) w.u64(d);
  w.f32_array(t.values());
}

template <typename T>
void read_tensor_into(BinaryReader& r, nn::Tensor<T>& t) {
  const auto rank = r.u32();
  if (rank != t.rank()) throw CorruptDataError("checkpoint: tensor rank mismatch");
  for (std::size_t i = 0; i < rank; ++i) {
    if (r.u64() != t.dim(i)) throw CorruptDataError("checkpoint: tensor shape mismatch");
  }
  t.storage() = r.f32_array<T>(t.size());
}

}  // namespace detail

template <typename T>
std::string save_checkpoint(const PaintingGenerator<T>& gen) {
  BinaryWriter w;
  w.bytes(std::string_view(kCheckpointMagic, 4));
  w.u32(kCheckpointVersion);
  detail::write_config(w, gen.config);
  for (int a = 0; a < 3; ++a) w.f64(gen.bounds.min[a]);
  for (int a = 0; a < 3; ++a) w.f64(gen.bounds.max[a]);
  w.u32(static_cast<std::uint32_t>(gen.styles.size()));
  w.u32(static_cast<std::uint32_t>(gen.config.style_dim));
  for (const auto& s : gen.styles) {
    if (s.z.size() != static_cast<std::size_t>(gen.config.style_dim)) {
      throw ValidationError("style set dimension does not match the painter");
    }
    for (double v : s.z) w.f64(v);
  }
  w.u32(static_cast<std::uint32_t>(gen.palette.size()));
  for (const auto& c : gen.palette) {
    for (float v : c) w.f32(v);
  }
  const auto params = gen.parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params) detail::write_tensor(w, *p);
  w.u64(fnv1a64(w.data()));
  return w.take();
}

template <typename T>
PaintingGenerator<T> load_checkpoint(std::string_view bytes) {
  if (bytes.size() < 8 || bytes.substr(0, 4) != std::string_view(kCheckpointMagic, 4)) {
    throw CorruptDataError("not a painter checkpoint (bad magic)");
  }
  BinaryReader head(bytes.substr(4, 4));
  const auto version = head.u32();
  if (version != kCheckpointVersion) {
    throw ValidationError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  if (bytes.size() < 16) throw CorruptDataError("truncated payload");
  BinaryReader tail(bytes.substr(bytes.size() - 8));
  if (tail.u64() != fnv1a64(bytes.substr(0, bytes.size() - 8))) {
    throw CorruptDataError("checkpoint checksum mismatch (truncated or corrupted payload)");
  }
  BinaryReader r(bytes.substr(8, bytes.size() - 16));
  const auto config = detail::read_config(r);
  auto gen = build_generator<T>(config, 0);
  Vec3 lo, hi;
  for (int a = 0; a < 3; ++a) lo[a] = r.f64();
  for (int a = 0; a < 3; ++a) hi[a] = r.f64();
  gen.bounds = AABB{lo, hi};
  if (!gen.bounds.has_positive_extent()) throw CorruptDataError("checkpoint: bounds have zero extent");
  const auto n_styles = r.u32();
  if (r.u32() != static_cast<std::uint32_t>(config.style_dim)) throw CorruptDataError("checkpoint: style dimension");
  if (static_cast<std::uint64_t>(n_styles) * config.style_dim * 8 > r.remaining()) {
    throw CorruptDataError("truncated payload");
  }
  gen.styles.resize(n_styles);
  for (auto& s : gen.styles) {
    s.z.resize(static_cast<std::size_t>(config.style_dim));
    for (auto& v : s.z) v = r.f64();
  }
  const auto n_palette = r.u32();
  if (n_palette != static_cast<std::uint32_t>(config.classes)) throw CorruptDataError("checkpoint: palette size");
  for (auto& c : gen.palette) {
    for (auto& v : c) v = r.f32();
  }
  auto params = gen.parameters();
  if (r.u32() != params.size()) throw CorruptDataError("checkpoint: parameter block count");
  for (auto* p : params) detail::read_tensor_into(r, *p);
  if (!r.at_end()) throw CorruptDataError("checkpoint: trailing bytes");
  return gen;
}

template <typename T>
void save_checkpoint_file(const PaintingGenerator<T>& gen, const std::filesystem::path& path) {
  write_file_bytes(path, save_checkpoint(gen));
}

template <typename T>
PaintingGenerator<T> load_checkpoint_file(const std::filesystem::path& path) {
  return load_checkpoint<T>(read_file_bytes(path));
}

}  // namespace scenepaint
