#pragma once

#include <vector>

#include "scenepaint/core/random.hpp"
#include "scenepaint/tensornet/conv.hpp"
#include "scenepaint/tensornet/ops.hpp"

namespace scenepaint {

/// Per-pixel (C+1)-way segmentation discriminator: a three-level
/// encoder-decoder (32/64/128 channels) with average pooling, bilinear
/// upsampling and skip connections. Input is an (H, W, 3) image in [0, 1].
template <typename T>
class Discriminator {
 public:
  int classes = 0;
  T slope = T(nn::kLeakySlope);
  nn::ConvParams<T> enc1, enc2, enc3, dec2, dec1, head;

  struct Cache {
    nn::Tensor<T> x;                  // scaled input
    nn::Tensor<T> e1, p1, e2, p2, e3;  // encoder activations
    nn::Tensor<T> u2, c2, d2;          // level-2 decoder
    nn::Tensor<T> u1, c1, d1;          // level-1 decoder
  };

  struct Grads {
    std::vector<nn::Tensor<T>> params;
    nn::Tensor<T> input;
  };

  static Discriminator make(int classes, std::uint64_t seed) {
    Discriminator d;
    d.classes = classes;
    Rng rng(mix_seed(seed, 0xd15c));
    d.enc1 = nn::make_conv<T>(3, 3, 32, rng);
    d.enc2 = nn::make_conv<T>(3, 32, 64, rng);
    d.enc3 = nn::make_conv<T>(3, 64, 128, rng);
    d.dec2 = nn::make_conv<T>(1, 128 + 64, 64, rng);
    d.dec1 = nn::make_conv<T>(1, 64 + 32, 32, rng);
    d.head = nn::make_conv<T>(1, 32, static_cast<std::size_t>(classes) + 1, rng);
    return d;
  }

  std::vector<nn::Tensor<T>*> parameters() {
    std::vector<nn::Tensor<T>*> p;
    for (auto* c : {&enc1, &enc2, &enc3, &dec2, &dec1, &head}) {
      p.push_back(&c->kernel);
      p.push_back(&c->bias);
    }
    return p;
  }

  std::size_t parameter_count() {
    std::size_t n = 0;
    for (auto* t : parameters()) n += t->size();
    return n;
  }

  /// (H, W, C+1) logits.
  nn::Tensor<T> forward(const nn::Tensor<T>& image, Cache* cache = nullptr) const {
    if (image.rank() != 3 || image.dim(2) != 3) throw ShapeError("discriminator expects an (H, W, 3) image");
    if (image.dim(0) < 4 || image.dim(1) < 4) throw ShapeError("discriminator needs images of at least 4x4");
    Cache local;
    Cache& c = cache ? *cache : local;
    c.x = nn::Tensor<T>(image.shape());
    for (std::size_t i = 0; i < image.size(); ++i) c.x[i] = T(2) * image[i] - T(1);
    c.e1 = act(nn::conv2d(c.x, enc1));
    c.p1 = nn::avg_pool2(c.e1);
    c.e2 = act(nn::conv2d(c.p1, enc2));
    c.p2 = nn::avg_pool2(c.e2);
    c.e3 = act(nn::conv2d(c.p2, enc3));
    c.u2 = nn::upsample_bilinear(c.e3, c.e2.dim(0), c.e2.dim(1));
    c.c2 = nn::concat_channels(c.u2, c.e2);
    c.d2 = act(nn::conv2d(c.c2, dec2));
    c.u1 = nn::upsample_bilinear(c.d2, c.e1.dim(0), c.e1.dim(1));
    c.c1 = nn::concat_channels(c.u1, c.e1);
    c.d1 = act(nn::conv2d(c.c1, dec1));
    return nn::conv2d(c.d1, head);
  }

  Grads backward(const nn::Tensor<T>& grad_logits, const Cache& c, bool need_input_grad) const {
    auto gh = nn::conv2d_backward(grad_logits, c.d1, head.kernel, head.padding);
    auto gd1 = nn::conv2d_backward(act_backward(gh.input, c.d1), c.c1, dec1.kernel, dec1.padding);
    const std::size_t cu1 = c.u1.dim(2);
    auto g_e1 = nn::slice_channels(gd1.input, cu1, c.e1.dim(2));
    auto g_d2 = nn::upsample_bilinear_backward(nn::slice_channels(gd1.input, 0, cu1), c.d2.shape());
    auto gd2 = nn::conv2d_backward(act_backward(g_d2, c.d2), c.c2, dec2.kernel, dec2.padding);
    const std::size_t cu2 = c.u2.dim(2);
    auto g_e2 = nn::slice_channels(gd2.input, cu2, c.e2.dim(2));
    auto g_e3 = nn::upsample_bilinear_backward(nn::slice_channels(gd2.input, 0, cu2), c.e3.shape());
    auto ge3 = nn::conv2d_backward(act_backward(g_e3, c.e3), c.p2, enc3.kernel, enc3.padding);
    g_e2 += nn::avg_pool2_backward(ge3.input, c.e2.shape());
    auto ge2 = nn::conv2d_backward(act_backward(g_e2, c.e2), c.p1, enc2.kernel, enc2.padding);
    g_e1 += nn::avg_pool2_backward(ge2.input, c.e1.shape());
    auto ge1 = nn::conv2d_backward(act_backward(g_e1, c.e1), c.x, enc1.kernel, enc1.padding, need_input_grad);
    Grads g;
    for (auto* cg : {&ge1, &ge2, &ge3, &gd2, &gd1, &gh}) {
      g.params.push_back(std::move(cg->kernel));
      g.params.push_back(std::move(cg->bias));
    }
    if (need_input_grad) {
      g.input = std::move(ge1.input);
      g.input *= T(2);
    }
    return g;
  }

 private:
  nn::Tensor<T> act(nn::Tensor<T> y) const {
    for (auto& v : y.values()) v = v > T(0) ? v : slope * v;
    return y;
  }

  nn::Tensor<T> act_backward(nn::Tensor<T> g, const nn::Tensor<T>& out) const {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(out[i] > T(0))) g[i] *= slope;
    }
    return g;
  }
};

}  // namespace scenepaint
