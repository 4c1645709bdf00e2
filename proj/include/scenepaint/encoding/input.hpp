#pragma once

#include <cstdint>
#include <vector>

#include "scenepaint/core/error.hpp"
#include "scenepaint/encoding/nonlinear.hpp"
#include "scenepaint/encoding/positional.hpp"
#include "scenepaint/raster/frame_maps.hpp"
#include "scenepaint/scenegraph/style.hpp"

namespace scenepaint {

/// Channel offsets of the generator input, in the fixed order
/// [positional, nonlinear, one-hot label, style].
struct InputLayout {
  std::size_t pe = 0;
  std::size_t ne = 0;
  std::size_t classes = 0;
  std::size_t style = 0;

  std::size_t pe_offset() const { return 0; }
  std::size_t ne_offset() const { return pe; }
  std::size_t label_offset() const { return pe + ne; }
  std::size_t style_offset() const { return pe + ne + classes; }
  std::size_t total() const { return pe + ne + classes + style; }
};

template <typename T>
struct AssembledInput {
  nn::Tensor<T> x;                       // (H, W, D)
  InputLayout layout;
  std::vector<std::uint32_t> pixels;     // covered pixel indices, row-major
  typename NonlinearEncoder<T>::Cache ne_cache;
};

/// Builds X for one view. Uncovered pixels are all-zero and are only
/// accepted with `allow_holes`.
template <typename T>
AssembledInput<T> assemble_input(const FrameMaps& frames, const StyleVector& z, const NonlinearEncoder<T>& enc,
                                 const PositionalEncoder& pe, const AABB& bounds, bool allow_holes = false) {
  const std::size_t n = frames.pixel_count();
  AssembledInput<T> out;
  out.layout = {pe.dim(), enc.out_dim(), static_cast<std::size_t>(frames.class_count), z.z.size()};
  const auto& L = out.layout;
  const std::size_t d = L.total();

  out.pixels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (frames.covered(i)) {
      if (frames.label[i] > frames.class_count) throw ValidationError("label exceeds class count");
      out.pixels.push_back(static_cast<std::uint32_t>(i));
    }
  }
  if (!allow_holes && out.pixels.size() != n) {
    throw ValidationError(std::to_string(n - out.pixels.size()) + " uncovered pixels in view (pass allow_holes to accept)");
  }

  const std::size_t p = out.pixels.size();
  nn::Tensor<T> coords({p, 3});
  std::vector<Vec3> normalized(p);
  for (std::size_t k = 0; k < p; ++k) {
    const auto i = out.pixels[k];
    normalized[k] = normalize_coord(frames.world(i), bounds);
    for (int a = 0; a < 3; ++a) coords[3 * k + a] = static_cast<T>(normalized[k][a]);
  }
  nn::Tensor<T> ne;
  if (L.ne > 0) ne = enc.forward(coords, &out.ne_cache);

  out.x = nn::Tensor<T>({static_cast<std::size_t>(frames.height), static_cast<std::size_t>(frames.width), d});
  for (std::size_t k = 0; k < p; ++k) {
    const auto i = out.pixels[k];
    T* row = out.x.data() + static_cast<std::size_t>(i) * d;
    pe.encode(normalized[k], row + L.pe_offset());
    for (std::size_t c = 0; c < L.ne; ++c) row[L.ne_offset() + c] = ne[k * L.ne + c];
    row[L.label_offset() + static_cast<std::size_t>(frames.label[i] - 1)] = T(1);
    for (std::size_t c = 0; c < L.style; ++c) row[L.style_offset() + c] = static_cast<T>(z.z[c]);
  }
  return out;
}

/// Gradients of the encoder parameters given dLoss/dX for an assembled input.
template <typename T>
typename NonlinearEncoder<T>::Grads encoder_backward(const nn::Tensor<T>& grad_x, const AssembledInput<T>& in,
                                                     const NonlinearEncoder<T>& enc) {
  nn::Tensor<T>::require_same_shape(grad_x, in.x, "encoder_backward");
  const auto& L = in.layout;
  const std::size_t p = in.pixels.size(), d = L.total();
  nn::Tensor<T> g({p, L.ne});
  for (std::size_t k = 0; k < p; ++k) {
    const T* row = grad_x.data() + static_cast<std::size_t>(in.pixels[k]) * d + L.ne_offset();
    std::copy_n(row, L.ne, g.data() + k * L.ne);
  }
  return enc.backward(g, in.ne_cache);
}

}  // namespace scenepaint
