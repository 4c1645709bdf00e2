#pragma once

#include <cmath>
#include <vector>

#include "scenepaint/core/error.hpp"
#include "scenepaint/raster/frame_maps.hpp"
#include "scenepaint/tensornet/softmax_ce.hpp"

namespace scenepaint {

/// Inverse-frequency class weights over a batch of label maps:
/// alpha_c = N / (C_present * n_c) for present classes, 0 otherwise.
/// Index c - 1 holds class c.
inline std::vector<double> class_weights(const std::vector<const FrameMaps*>& batch, int classes) {
  if (batch.empty()) throw ValidationError("class_weights: empty batch");
  std::vector<std::size_t> counts(static_cast<std::size_t>(classes), 0);
  std::size_t total = 0;
  for (const auto* f : batch) {
    for (auto l : f->label) {
      if (l < 1) continue;
      if (l > classes) throw ValidationError("class_weights: label exceeds class count");
      ++counts[static_cast<std::size_t>(l - 1)];
      ++total;
    }
  }
  if (total == 0) throw ValidationError("class_weights: batch has no labeled pixels");
  std::size_t present = 0;
  for (auto n : counts) present += n > 0;
  std::vector<double> alpha(counts.size(), 0.0);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > 0) {
      alpha[c] = static_cast<double>(total) / (static_cast<double>(present) * static_cast<double>(counts[c]));
    }
  }
  return alpha;
}

template <typename T>
struct BatchLoss {
  double loss = 0.0;
  std::vector<nn::Tensor<T>> grad;  // one per batch item
};

/// Sum over pixels of the L1 norm of the RGB difference, divided by K = BHW.
template <typename T>
BatchLoss<T> recon_loss(const std::vector<nn::Tensor<T>>& painted, const std::vector<nn::Tensor<T>>& refs) {
  if (painted.size() != refs.size() || painted.empty()) throw ShapeError("recon_loss: batch sizes differ or are empty");
  std::size_t pixels = 0;
  for (std::size_t b = 0; b < painted.size(); ++b) {
    nn::Tensor<T>::require_same_shape(painted[b], refs[b], "recon_loss");
    pixels += painted[b].size() / 3;
  }
  const double k = static_cast<double>(pixels);
  BatchLoss<T> out;
  for (std::size_t b = 0; b < painted.size(); ++b) {
    nn::Tensor<T> g(painted[b].shape());
    for (std::size_t i = 0; i < painted[b].size(); ++i) {
      const double d = static_cast<double>(painted[b][i]) - static_cast<double>(refs[b][i]);
      out.loss += std::abs(d);
      g[i] = static_cast<T>((d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / k);
    }
    out.grad.push_back(std::move(g));
  }
  out.loss /= k;
  return out;
}

namespace detail {

/// Per-pixel targets (class id - 1) and alpha weights from a label map.
template <typename T>
void class_targets(const FrameMaps& f, const std::vector<double>& alpha, std::vector<int>& targets,
                   std::vector<T>& weights) {
  targets.assign(f.pixel_count(), -1);
  weights.assign(f.pixel_count(), T(0));
  for (std::size_t i = 0; i < f.pixel_count(); ++i) {
    const int l = f.label[i];
    if (l < 1) continue;
    if (static_cast<std::size_t>(l) > alpha.size()) throw ValidationError("label exceeds class weight vector");
    targets[i] = l - 1;
    weights[i] = static_cast<T>(alpha[static_cast<std::size_t>(l - 1)]);
  }
}

template <typename T>
void check_logits(const nn::Tensor<T>& logits, const FrameMaps& f, std::size_t classes) {
  if (logits.rank() != 3 || logits.dim(0) != static_cast<std::size_t>(f.height) ||
      logits.dim(1) != static_cast<std::size_t>(f.width) || logits.dim(2) != classes + 1) {
    throw ShapeError("discriminator logits " + nn::Tensor<T>::shape_string(logits.shape()) + " do not match labels " +
                     std::to_string(f.height) + "x" + std::to_string(f.width) + " with " + std::to_string(classes) +
                     "+1 classes");
  }
}

template <typename T>
double batch_pixels(const std::vector<const FrameMaps*>& labels) {
  double k = 0.0;
  for (const auto* f : labels) k += static_cast<double>(f->pixel_count());
  return k;
}

}  // namespace detail

/// Generator adversarial loss: weighted cross-entropy of D(painted) against
/// the true semantic classes, normalized by K = BHW.
template <typename T>
BatchLoss<T> adv_loss_gen(const std::vector<nn::Tensor<T>>& fake_logits, const std::vector<const FrameMaps*>& labels,
                          const std::vector<double>& alpha) {
  if (fake_logits.size() != labels.size() || labels.empty()) throw ShapeError("adv_loss_gen: batch sizes differ");
  const double k = detail::batch_pixels<T>(labels);
  BatchLoss<T> out;
  std::vector<int> t;
  std::vector<T> w;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    detail::check_logits(fake_logits[b], *labels[b], alpha.size());
    detail::class_targets(*labels[b], alpha, t, w);
    auto r = nn::softmax_ce<T>(fake_logits[b], t, w, k);
    out.loss += r.loss;
    out.grad.push_back(std::move(r.grad));
  }
  return out;
}

template <typename T>
struct DiscLoss {
  double loss = 0.0;
  double real = 0.0;
  double fake = 0.0;
  std::vector<nn::Tensor<T>> grad_real;
  std::vector<nn::Tensor<T>> grad_fake;
};

/// Discriminator loss: weighted cross-entropy of D(reference) against the
/// true classes plus cross-entropy of D(painted) against the fake class
/// (channel C), both normalized by K = BHW. Unlabeled pixels are ignored.
template <typename T>
DiscLoss<T> disc_loss(const std::vector<nn::Tensor<T>>& real_logits, const std::vector<nn::Tensor<T>>& fake_logits,
                      const std::vector<const FrameMaps*>& labels, const std::vector<double>& alpha) {
  if (real_logits.size() != labels.size() || fake_logits.size() != labels.size() || labels.empty()) {
    throw ShapeError("disc_loss: batch sizes differ");
  }
  const double k = detail::batch_pixels<T>(labels);
  const int fake_class = static_cast<int>(alpha.size());
  DiscLoss<T> out;
  std::vector<int> t;
  std::vector<T> w;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    detail::check_logits(real_logits[b], *labels[b], alpha.size());
    detail::check_logits(fake_logits[b], *labels[b], alpha.size());
    detail::class_targets(*labels[b], alpha, t, w);
    auto r = nn::softmax_ce<T>(real_logits[b], t, w, k);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const bool labeled = t[i] >= 0;
      t[i] = labeled ? fake_class : -1;
      w[i] = labeled ? T(1) : T(0);
    }
    auto f = nn::softmax_ce<T>(fake_logits[b], t, w, k);
    out.real += r.loss;
    out.fake += f.loss;
    out.grad_real.push_back(std::move(r.grad));
    out.grad_fake.push_back(std::move(f.grad));
  }
  out.loss = out.real + out.fake;
  return out;
}

}  // namespace scenepaint
