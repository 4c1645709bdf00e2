#pragma once

#include <vector>

#include "scenepaint/core/random.hpp"
#include "scenepaint/scenegraph/geometry.hpp"
#include "scenepaint/tensornet/gemm.hpp"
#include "scenepaint/tensornet/ops.hpp"
#include "scenepaint/tensornet/tensor.hpp"

namespace scenepaint {

/// Learnable two-layer coordinate encoding
///   out = W2^T [ sigma(W1^T (x, 1)), 1 ]
/// with sigma a leaky ReLU. W1 is (4, hidden); W2 is (hidden + 1, dim).
template <typename T>
struct NonlinearEncoder {
  nn::Tensor<T> w1;
  nn::Tensor<T> w2;
  T slope = T(nn::kLeakySlope);

  /// Per-batch activations kept for the backward pass.
  struct Cache {
    nn::Tensor<T> input;   // (P, 4) homogeneous coordinates
    nn::Tensor<T> pre;     // (P, hidden)
    nn::Tensor<T> hidden;  // (P, hidden + 1), last column is 1
  };

  struct Grads {
    nn::Tensor<T> w1;
    nn::Tensor<T> w2;
    nn::Tensor<T> coord;  // (P, 3)
  };

  static NonlinearEncoder make(std::size_t hidden, std::size_t dim, Rng& rng) {
    NonlinearEncoder e;
    e.w1 = nn::Tensor<T>({4, hidden});
    e.w2 = nn::Tensor<T>({hidden + 1, dim});
    const double a1 = std::sqrt(1.0 / 4.0);
    const double a2 = std::sqrt(1.0 / static_cast<double>(hidden + 1));
    for (auto& v : e.w1.values()) v = static_cast<T>(rng.uniform(-a1, a1));
    for (auto& v : e.w2.values()) v = static_cast<T>(rng.uniform(-a2, a2));
    return e;
  }

  std::size_t hidden_width() const { return w1.empty() ? 0 : w1.dim(1); }
  std::size_t out_dim() const { return w2.empty() ? 0 : w2.dim(1); }
  std::size_t parameter_count() const { return w1.size() + w2.size(); }

  /// Rows of `coords` (P, 3) mapped to (P, dim).
  nn::Tensor<T> forward(const nn::Tensor<T>& coords, Cache* cache = nullptr) const {
    const std::size_t p = coords.dim(0), h = hidden_width(), d = out_dim();
    if (coords.rank() != 2 || coords.dim(1) != 3) throw ShapeError("nonlinear encoder expects (P, 3) coordinates");
    nn::Tensor<T> input({p, 4});
    for (std::size_t i = 0; i < p; ++i) {
      for (int a = 0; a < 3; ++a) input[4 * i + a] = coords[3 * i + a];
      input[4 * i + 3] = T(1);
    }
    nn::Tensor<T> pre({p, h});
    nn::row_affine<T>(input.data(), w1.data(), nullptr, pre.data(), p, 4, h);
    nn::Tensor<T> hid({p, h + 1});
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < h; ++j) {
        const T v = pre[i * h + j];
        hid[i * (h + 1) + j] = v > T(0) ? v : slope * v;
      }
      hid[i * (h + 1) + h] = T(1);
    }
    nn::Tensor<T> out({p, d});
    nn::row_affine<T>(hid.data(), w2.data(), nullptr, out.data(), p, h + 1, d);
    if (cache) *cache = Cache{std::move(input), std::move(pre), std::move(hid)};
    return out;
  }

  Grads backward(const nn::Tensor<T>& grad_out, const Cache& cache) const {
    const std::size_t p = cache.input.dim(0), h = hidden_width(), d = out_dim();
    if (grad_out.rank() != 2 || grad_out.dim(0) != p || grad_out.dim(1) != d) {
      throw ShapeError("nonlinear encoder backward: gradient shape mismatch");
    }
    Grads g{nn::Tensor<T>(w1.shape()), nn::Tensor<T>(w2.shape()), nn::Tensor<T>({p, 3})};
    nn::accumulate_at_b(cache.hidden.data(), grad_out.data(), g.w2.data(), p, h + 1, d);
    nn::Tensor<T> grad_hidden({p, h + 1});
    nn::multiply_a_bt(grad_out.data(), w2.data(), grad_hidden.data(), p, h + 1, d);
    nn::Tensor<T> grad_pre({p, h});
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < h; ++j) {
        const T gv = grad_hidden[i * (h + 1) + j];
        grad_pre[i * h + j] = cache.pre[i * h + j] > T(0) ? gv : slope * gv;
      }
    }
    nn::accumulate_at_b(cache.input.data(), grad_pre.data(), g.w1.data(), p, 4, h);
    nn::Tensor<T> grad_input({p, 4});
    nn::multiply_a_bt(grad_pre.data(), w1.data(), grad_input.data(), p, 4, h);
    for (std::size_t i = 0; i < p; ++i) {
      for (int a = 0; a < 3; ++a) g.coord[3 * i + a] = grad_input[4 * i + a];
    }
    return g;
  }

  std::vector<T*> parameter_data() { return {w1.data(), w2.data()}; }

  bool operator==(const NonlinearEncoder&) const = default;
};

/// Encoding of a single point; bitwise equal to the same row of a batched
/// forward pass.
template <typename T>
std::vector<T> gamma_ne(const Vec3& x, const NonlinearEncoder<T>& enc) {
  nn::Tensor<T> c({1, 3}, std::vector<T>{static_cast<T>(x.x()), static_cast<T>(x.y()), static_cast<T>(x.z())});
  return enc.forward(c).storage();
}

}  // namespace scenepaint
