#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "scenepaint/core/error.hpp"
#include "scenepaint/core/random.hpp"
#include "scenepaint/scenegraph/geometry.hpp"

namespace scenepaint {

/// Output width of the sinusoidal encoding with F frequency bands.
constexpr std::size_t sinusoidal_dim(int frequencies) { return 6 * static_cast<std::size_t>(frequencies) + 3; }

/// Writes [x, y, z, then per band f: sin(2^f pi x), cos(2^f pi x), sin(.. y),
/// cos(.. y), sin(.. z), cos(.. z)] for a normalized coordinate.
template <typename T>
void sinusoidal_encode(const Vec3& x, int frequencies, T* out) {
  for (int a = 0; a < 3; ++a) out[a] = static_cast<T>(x[a]);
  T* o = out + 3;
  for (int f = 0; f < frequencies; ++f) {
    const double w = std::ldexp(std::numbers::pi, f);
    for (int a = 0; a < 3; ++a) {
      *o++ = static_cast<T>(std::sin(w * x[a]));
      *o++ = static_cast<T>(std::cos(w * x[a]));
    }
  }
}

inline std::vector<double> gamma_pe(const Vec3& x, int frequencies) {
  if (frequencies < 0) throw ValidationError("frequency count must be >= 0");
  std::vector<double> out(sinusoidal_dim(frequencies));
  sinusoidal_encode(x, frequencies, out.data());
  return out;
}

/// Random Fourier features [sin(Bx), cos(Bx)], B ~ N(0, 1) of shape (n, 3).
/// Ablation alternative to the sinusoidal encoding.
struct FourierEncoder {
  std::vector<Vec3> rows;

  static FourierEncoder make(std::size_t features, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0xf0));
    FourierEncoder e;
    e.rows.resize(features);
    for (auto& r : e.rows) r = Vec3(rng.normal(), rng.normal(), rng.normal());
    return e;
  }

  std::size_t dim() const { return 2 * rows.size(); }

  template <typename T>
  void encode(const Vec3& x, T* out) const {
    const std::size_t n = rows.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double p = rows[i].dot(x);
      out[i] = static_cast<T>(std::sin(p));
      out[n + i] = static_cast<T>(std::cos(p));
    }
  }
};

enum class PositionalKind { none, sinusoidal, fourier };

inline std::string to_string(PositionalKind k) {
  switch (k) {
    case PositionalKind::none: return "none";
    case PositionalKind::sinusoidal: return "sinusoidal";
    case PositionalKind::fourier: return "fourier";
  }
  return "?";
}

inline PositionalKind positional_kind_from_string(const std::string& s) {
  if (s == "none") return PositionalKind::none;
  if (s == "sinusoidal") return PositionalKind::sinusoidal;
  if (s == "fourier") return PositionalKind::fourier;
  throw ValidationError("unknown positional encoding '" + s + "'");
}

/// The fixed (parameter-free) part of the coordinate encoding.
struct PositionalEncoder {
  PositionalKind kind = PositionalKind::sinusoidal;
  int frequencies = 2;
  FourierEncoder fourier;

  std::size_t dim() const {
    switch (kind) {
      case PositionalKind::none: return 0;
      case PositionalKind::sinusoidal: return sinusoidal_dim(frequencies);
      case PositionalKind::fourier: return fourier.dim();
    }
    return 0;
  }

  template <typename T>
  void encode(const Vec3& x, T* out) const {
    if (kind == PositionalKind::sinusoidal) sinusoidal_encode(x, frequencies, out);
    if (kind == PositionalKind::fourier) fourier.encode(x, out);
  }
};

}  // namespace scenepaint
