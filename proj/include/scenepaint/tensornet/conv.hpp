#pragma once

#include <cstring>
#include <string>

#include "scenepaint/core/random.hpp"
#include "scenepaint/tensornet/gemm.hpp"
#include "scenepaint/tensornet/tensor.hpp"

namespace scenepaint::nn {

/// Kernel (k, k, Cin, Cout) plus bias (Cout), stride 1, zero padding.
template <typename T>
struct ConvParams {
  Tensor<T> kernel;
  Tensor<T> bias;
  int padding = 0;

  std::size_t size() const { return kernel.dim(0); }
  std::size_t in_channels() const { return kernel.dim(2); }
  std::size_t out_channels() const { return kernel.dim(3); }
  std::size_t parameter_count() const { return kernel.size() + bias.size(); }
};

/// Uniform fan-in initialization: U(-a, a) with a = sqrt(1 / fan_in).
template <typename T>
ConvParams<T> make_conv(std::size_t k, std::size_t cin, std::size_t cout, Rng& rng) {
  if (k % 2 == 0) throw ValidationError("convolution kernel size must be odd");
  ConvParams<T> p{Tensor<T>({k, k, cin, cout}), Tensor<T>({cout}), static_cast<int>((k - 1) / 2)};
  const double a = std::sqrt(1.0 / static_cast<double>(k * k * cin));
  for (auto& v : p.kernel.values()) v = static_cast<T>(rng.uniform(-a, a));
  for (auto& v : p.bias.values()) v = static_cast<T>(rng.uniform(-a, a));
  return p;
}

namespace detail {

struct ConvGeometry {
  std::size_t h, w, cin, k, cout, pad, out_h, out_w;
};

template <typename T>
ConvGeometry conv_geometry(const Tensor<T>& input, const Tensor<T>& kernel, int padding) {
  if (input.rank() != 3) throw ShapeError("conv2d: input must be (H, W, C)");
  if (kernel.rank() != 4 || kernel.dim(0) != kernel.dim(1)) throw ShapeError("conv2d: kernel must be (k, k, Cin, Cout)");
  if (kernel.dim(0) % 2 == 0) throw ShapeError("conv2d: kernel size must be odd");
  if (kernel.dim(2) != input.dim(2)) {
    throw ShapeError("conv2d: input has " + std::to_string(input.dim(2)) + " channels, kernel expects " +
                     std::to_string(kernel.dim(2)));
  }
  if (padding < 0) throw ShapeError("conv2d: negative padding");
  const std::size_t k = kernel.dim(0);
  const std::size_t p = static_cast<std::size_t>(padding);
  if (input.dim(0) + 2 * p < k || input.dim(1) + 2 * p < k) throw ShapeError("conv2d: kernel larger than padded input");
  return {input.dim(0), input.dim(1), input.dim(2), k, kernel.dim(3), p, input.dim(0) + 2 * p - k + 1,
          input.dim(1) + 2 * p - k + 1};
}

/// Rows are output pixels; columns are (ky, kx, cin) patches, zero-filled
/// outside the input.
template <typename T>
std::vector<T> im2col(const Tensor<T>& input, const ConvGeometry& g) {
  const std::size_t cols = g.k * g.k * g.cin;
  std::vector<T> out(g.out_h * g.out_w * cols, T(0));
  for (std::size_t y = 0; y < g.out_h; ++y) {
    for (std::size_t x = 0; x < g.out_w; ++x) {
      T* row = out.data() + (y * g.out_w + x) * cols;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y + ky) - static_cast<std::ptrdiff_t>(g.pad);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
        for (std::size_t kx = 0; kx < g.k; ++kx) {
          const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x + kx) - static_cast<std::ptrdiff_t>(g.pad);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
          std::memcpy(row + (ky * g.k + kx) * g.cin, input.data() + (iy * g.w + ix) * g.cin, g.cin * sizeof(T));
        }
      }
    }
  }
  return out;
}

template <typename T>
void col2im_accumulate(const std::vector<T>& cols_data, const ConvGeometry& g, Tensor<T>& grad_input) {
  const std::size_t cols = g.k * g.k * g.cin;
  for (std::size_t y = 0; y < g.out_h; ++y) {
    for (std::size_t x = 0; x < g.out_w; ++x) {
      const T* row = cols_data.data() + (y * g.out_w + x) * cols;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y + ky) - static_cast<std::ptrdiff_t>(g.pad);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
        for (std::size_t kx = 0; kx < g.k; ++kx) {
          const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x + kx) - static_cast<std::ptrdiff_t>(g.pad);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
          T* dst = grad_input.data() + (iy * g.w + ix) * g.cin;
          const T* src = row + (ky * g.k + kx) * g.cin;
          for (std::size_t c = 0; c < g.cin; ++c) dst[c] += src[c];
        }
      }
    }
  }
}

}  // namespace detail

/// Stride-1 cross-correlation with zero padding. Output is
/// (H + 2p - k + 1, W + 2p - k + 1, Cout).
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias, int padding) {
  const auto g = detail::conv_geometry(input, kernel, padding);
  if (bias.size() != g.cout) throw ShapeError("conv2d: bias length does not match output channels");
  Tensor<T> out({g.out_h, g.out_w, g.cout});
  const std::size_t cols = g.k * g.k * g.cin;
  if (g.k == 1 && g.pad == 0) {
    row_affine(input.data(), kernel.data(), bias.data(), out.data(), g.out_h * g.out_w, cols, g.cout);
  } else {
    const auto patches = detail::im2col(input, g);
    row_affine(patches.data(), kernel.data(), bias.data(), out.data(), g.out_h * g.out_w, cols, g.cout);
  }
  check_finite(out, "conv2d");
  return out;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const ConvParams<T>& p) {
  return conv2d(input, p.kernel, p.bias, p.padding);
}

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> kernel;
  Tensor<T> bias;
};

/// Reverse-mode gradients of conv2d given the forward input.
template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& input, const Tensor<T>& kernel, int padding,
                             bool need_input_grad = true) {
  const auto g = detail::conv_geometry(input, kernel, padding);
  if (grad_out.rank() != 3 || grad_out.dim(0) != g.out_h || grad_out.dim(1) != g.out_w || grad_out.dim(2) != g.cout) {
    throw ShapeError("conv2d_backward: gradient shape does not match forward output");
  }
  const std::size_t rows = g.out_h * g.out_w;
  const std::size_t cols = g.k * g.k * g.cin;
  ConvGrads<T> grads{Tensor<T>(), Tensor<T>(kernel.shape()), Tensor<T>({g.cout})};
  for (std::size_t r = 0; r < rows; ++r) {
    const T* go = grad_out.data() + r * g.cout;
    for (std::size_t c = 0; c < g.cout; ++c) grads.bias[c] += go[c];
  }
  const bool direct = g.k == 1 && g.pad == 0;
  std::vector<T> patches;
  if (!direct) patches = detail::im2col(input, g);
  const T* col_ptr = direct ? input.data() : patches.data();
  accumulate_at_b(col_ptr, grad_out.data(), grads.kernel.data(), rows, cols, g.cout);
  if (need_input_grad) {
    grads.input = Tensor<T>(input.shape());
    if (direct) {
      multiply_a_bt(grad_out.data(), kernel.data(), grads.input.data(), rows, cols, g.cout);
    } else {
      std::vector<T> grad_cols(rows * cols);
      multiply_a_bt(grad_out.data(), kernel.data(), grad_cols.data(), rows, cols, g.cout);
      detail::col2im_accumulate(grad_cols, g, grads.input);
    }
  }
  return grads;
}

}  // namespace scenepaint::nn
