#pragma once

#include <cmath>
#include <vector>

#include "scenepaint/tensornet/tensor.hpp"

namespace scenepaint::nn {

inline constexpr double kLeakySlope = 0.2;

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope) {
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : slope * x[i];
  return y;
}

/// Derivative at 0 is taken as `slope`.
template <typename T>
Tensor<T> leaky_relu_backward(const Tensor<T>& grad, const Tensor<T>& x, T slope) {
  Tensor<T>::require_same_shape(grad, x, "leaky_relu_backward");
  Tensor<T> g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > T(0) ? grad[i] : slope * grad[i];
  return g;
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
  return y;
}

/// Takes the forward output y = tanh(x).
template <typename T>
Tensor<T> tanh_backward(const Tensor<T>& grad, const Tensor<T>& y) {
  Tensor<T>::require_same_shape(grad, y, "tanh_backward");
  Tensor<T> g(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) g[i] = grad[i] * (T(1) - y[i] * y[i]);
  return g;
}

/// 2x2 average pooling of an (H, W, C) tensor; odd trailing rows/cols dropped.
template <typename T>
Tensor<T> avg_pool2(const Tensor<T>& x) {
  const std::size_t h = x.dim(0) / 2, w = x.dim(1) / 2, c = x.dim(2);
  if (h == 0 || w == 0) throw ShapeError("avg_pool2: input too small");
  Tensor<T> y({h, w, c});
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      for (std::size_t k = 0; k < c; ++k) {
        y.at(i, j, k) = T(0.25) * (x.at(2 * i, 2 * j, k) + x.at(2 * i, 2 * j + 1, k) + x.at(2 * i + 1, 2 * j, k) +
                                   x.at(2 * i + 1, 2 * j + 1, k));
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> avg_pool2_backward(const Tensor<T>& grad, const std::vector<std::size_t>& input_shape) {
  Tensor<T> g(input_shape);
  for (std::size_t i = 0; i < grad.dim(0); ++i) {
    for (std::size_t j = 0; j < grad.dim(1); ++j) {
      for (std::size_t k = 0; k < grad.dim(2); ++k) {
        const T v = T(0.25) * grad.at(i, j, k);
        g.at(2 * i, 2 * j, k) += v;
        g.at(2 * i, 2 * j + 1, k) += v;
        g.at(2 * i + 1, 2 * j, k) += v;
        g.at(2 * i + 1, 2 * j + 1, k) += v;
      }
    }
  }
  return g;
}

namespace detail {

/// Source taps for bilinear resampling from `in` to `out` samples, half-pixel
/// centers, clamped at the border.
struct LinearTaps {
  std::size_t i0, i1;
  double w0, w1;
};

inline std::vector<LinearTaps> linear_taps(std::size_t in, std::size_t out) {
  std::vector<LinearTaps> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t o = 0; o < out; ++o) {
    double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
    if (src < 0.0) src = 0.0;
    const auto i0 = std::min(static_cast<std::size_t>(src), in - 1);
    const auto i1 = std::min(i0 + 1, in - 1);
    const double f = src - static_cast<double>(i0);
    taps[o] = {i0, i1, 1.0 - f, f};
  }
  return taps;
}

}  // namespace detail

/// Bilinear resize of an (H, W, C) tensor to (out_h, out_w, C).
template <typename T>
Tensor<T> upsample_bilinear(const Tensor<T>& x, std::size_t out_h, std::size_t out_w) {
  const std::size_t c = x.dim(2);
  const auto ty = detail::linear_taps(x.dim(0), out_h);
  const auto tx = detail::linear_taps(x.dim(1), out_w);
  Tensor<T> y({out_h, out_w, c});
  for (std::size_t i = 0; i < out_h; ++i) {
    for (std::size_t j = 0; j < out_w; ++j) {
      const T a = static_cast<T>(ty[i].w0 * tx[j].w0), b = static_cast<T>(ty[i].w0 * tx[j].w1);
      const T d = static_cast<T>(ty[i].w1 * tx[j].w0), e = static_cast<T>(ty[i].w1 * tx[j].w1);
      for (std::size_t k = 0; k < c; ++k) {
        y.at(i, j, k) = a * x.at(ty[i].i0, tx[j].i0, k) + b * x.at(ty[i].i0, tx[j].i1, k) +
                        d * x.at(ty[i].i1, tx[j].i0, k) + e * x.at(ty[i].i1, tx[j].i1, k);
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> upsample_bilinear_backward(const Tensor<T>& grad, const std::vector<std::size_t>& input_shape) {
  Tensor<T> g(input_shape);
  const std::size_t c = input_shape[2];
  const auto ty = detail::linear_taps(input_shape[0], grad.dim(0));
  const auto tx = detail::linear_taps(input_shape[1], grad.dim(1));
  for (std::size_t i = 0; i < grad.dim(0); ++i) {
    for (std::size_t j = 0; j < grad.dim(1); ++j) {
      const T a = static_cast<T>(ty[i].w0 * tx[j].w0), b = static_cast<T>(ty[i].w0 * tx[j].w1);
      const T d = static_cast<T>(ty[i].w1 * tx[j].w0), e = static_cast<T>(ty[i].w1 * tx[j].w1);
      for (std::size_t k = 0; k < c; ++k) {
        const T v = grad.at(i, j, k);
        g.at(ty[i].i0, tx[j].i0, k) += a * v;
        g.at(ty[i].i0, tx[j].i1, k) += b * v;
        g.at(ty[i].i1, tx[j].i0, k) += d * v;
        g.at(ty[i].i1, tx[j].i1, k) += e * v;
      }
    }
  }
  return g;
}

/// Channel concatenation of two (H, W, *) tensors.
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.dim(0) != b.dim(0) || a.dim(1) != b.dim(1)) throw ShapeError("concat_channels: spatial mismatch");
  const std::size_t ca = a.dim(2), cb = b.dim(2), n = a.dim(0) * a.dim(1);
  Tensor<T> y({a.dim(0), a.dim(1), ca + cb});
  for (std::size_t p = 0; p < n; ++p) {
    std::copy_n(a.data() + p * ca, ca, y.data() + p * (ca + cb));
    std::copy_n(b.data() + p * cb, cb, y.data() + p * (ca + cb) + ca);
  }
  return y;
}

/// Channel range [begin, begin + count) of an (H, W, C) tensor.
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, std::size_t begin, std::size_t count) {
  const std::size_t c = x.dim(2), n = x.dim(0) * x.dim(1);
  if (begin + count > c) throw ShapeError("slice_channels: range out of bounds");
  Tensor<T> y({x.dim(0), x.dim(1), count});
  for (std::size_t p = 0; p < n; ++p) std::copy_n(x.data() + p * c + begin, count, y.data() + p * count);
  return y;
}

}  // namespace scenepaint::nn
