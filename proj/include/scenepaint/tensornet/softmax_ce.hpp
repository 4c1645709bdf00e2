#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "scenepaint/tensornet/tensor.hpp"

namespace scenepaint::nn {

template <typename T>
struct LossAndGrad {
  double loss = 0.0;
  Tensor<T> grad;
};

/// Per-pixel K-way cross-entropy over (H, W, K) logits:
///   loss = sum_i w_i * -log softmax(logits_i)[t_i] / normalizer
/// Pixels with zero weight contribute nothing and may carry target -1.
/// Omitting `normalizer` uses the pixel count (a weighted mean).
template <typename T>
LossAndGrad<T> softmax_ce(const Tensor<T>& logits, std::span<const int> targets, std::span<const T> weights,
                          double normalizer = 0.0) {
  if (logits.rank() != 3) throw ShapeError("softmax_ce: logits must be (H, W, K)");
  const std::size_t n = logits.dim(0) * logits.dim(1);
  const std::size_t k = logits.dim(2);
  if (targets.size() != n || weights.size() != n) throw ShapeError("softmax_ce: targets/weights length mismatch");
  if (normalizer <= 0.0) normalizer = static_cast<double>(n);
  LossAndGrad<T> out{0.0, Tensor<T>(logits.shape())};
  std::vector<double> prob(k);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = static_cast<double>(weights[i]);
    if (w < 0.0 || !std::isfinite(w)) throw ValidationError("softmax_ce: weights must be finite and non-negative");
    if (w == 0.0) continue;
    const int t = targets[i];
    if (t < 0 || static_cast<std::size_t>(t) >= k) {
      throw ValidationError("softmax_ce: target " + std::to_string(t) + " out of range [0, " + std::to_string(k) + ")");
    }
    const T* z = logits.data() + i * k;
    double zmax = z[0];
    for (std::size_t c = 1; c < k; ++c) zmax = std::max(zmax, static_cast<double>(z[c]));
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      prob[c] = std::exp(static_cast<double>(z[c]) - zmax);
      sum += prob[c];
    }
    const double lse = zmax + std::log(sum);
    out.loss += w * (lse - static_cast<double>(z[t]));
    T* g = out.grad.data() + i * k;
    const double scale = w / normalizer;
    for (std::size_t c = 0; c < k; ++c) {
      const double p = prob[c] / sum;
      g[c] = static_cast<T>(scale * (p - (static_cast<std::size_t>(t) == c ? 1.0 : 0.0)));
    }
  }
  out.loss /= normalizer;
  return out;
}

/// Softmax over the last axis of (H, W, K) logits.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  const std::size_t k = logits.dim(logits.rank() - 1);
  const std::size_t n = logits.size() / k;
  Tensor<T> out(logits.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const T* z = logits.data() + i * k;
    double zmax = z[0];
    for (std::size_t c = 1; c < k; ++c) zmax = std::max(zmax, static_cast<double>(z[c]));
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += std::exp(static_cast<double>(z[c]) - zmax);
    for (std::size_t c = 0; c < k; ++c) out[i * k + c] = static_cast<T>(std::exp(static_cast<double>(z[c]) - zmax) / sum);
  }
  return out;
}

}  // namespace scenepaint::nn
