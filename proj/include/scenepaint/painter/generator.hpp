#pragma once

#include <array>
#include <string>
#include <vector>

#include "scenepaint/core/error.hpp"
#include "scenepaint/core/image.hpp"
#include "scenepaint/core/random.hpp"
#include "scenepaint/encoding/input.hpp"
#include "scenepaint/raster/frame_io.hpp"
#include "scenepaint/tensornet/conv.hpp"
#include "scenepaint/tensornet/ops.hpp"

namespace scenepaint {

enum class GeneratorKind { mlp, cnn };

inline std::string to_string(GeneratorKind k) { return k == GeneratorKind::mlp ? "mlp" : "cnn"; }

inline GeneratorKind generator_kind_from_string(const std::string& s) {
  if (s == "mlp") return GeneratorKind::mlp;
  if (s == "cnn") return GeneratorKind::cnn;
  throw ValidationError("unknown generator kind '" + s + "' (expected mlp or cnn)");
}

struct GeneratorConfig {
  GeneratorKind kind = GeneratorKind::cnn;
  int layers = 3;   // convolution layers including the 3-channel output layer
  int hidden = 128;
  double slope = nn::kLeakySlope;
  PositionalKind positional = PositionalKind::sinusoidal;
  int frequencies = 2;
  int fourier_features = 32;
  std::uint64_t fourier_seed = 0;
  int ne_dim = 64;  // 0 disables the learnable encoding
  int ne_hidden = 64;
  int style_dim = 64;
  int classes = 14;

  int kernel() const { return kind == GeneratorKind::mlp ? 1 : 3; }

  PositionalEncoder make_positional() const {
    PositionalEncoder pe;
    pe.kind = positional;
    pe.frequencies = frequencies;
    if (positional == PositionalKind::fourier) {
      pe.fourier = FourierEncoder::make(static_cast<std::size_t>(fourier_features), fourier_seed);
    }
    return pe;
  }

  std::size_t positional_dim() const {
    switch (positional) {
      case PositionalKind::none: return 0;
      case PositionalKind::sinusoidal: return sinusoidal_dim(frequencies);
      case PositionalKind::fourier: return 2 * static_cast<std::size_t>(fourier_features);
    }
    return 0;
  }

  /// Channel count D of the generator input.
  std::size_t input_channels() const {
    return positional_dim() + static_cast<std::size_t>(ne_dim + classes + style_dim);
  }

  void validate() const {
    auto need = [](bool ok, const std::string& what) {
      if (!ok) throw ValidationError("invalid generator config: " + what);
    };
    need(layers >= 2, "layers must be >= 2");
    need(hidden >= 1, "hidden width must be >= 1");
    need(slope > 0.0 && slope < 1.0, "slope must be in (0, 1)");
    need(frequencies >= 0 && frequencies <= 20, "frequency count must be in [0, 20]");
    need(positional != PositionalKind::fourier || fourier_features >= 1, "fourier feature count must be >= 1");
    need(ne_dim >= 0, "nonlinear encoding dimension must be >= 0");
    need(ne_dim == 0 || ne_hidden >= 1, "nonlinear encoding hidden width must be >= 1");
    need(style_dim >= 1, "style dimension must be >= 1");
    need(classes >= 1, "class count must be >= 1");
  }

  bool operator==(const GeneratorConfig&) const = default;
};

/// Named architectures. `desk_*` are the small defaults used for CPU runs.
/// `wide_cnn`, `deep_cnn` and `deep_mlp` are the large layer counts and widths.
inline GeneratorConfig generator_preset(const std::string& name, int classes) {
  GeneratorConfig c;
  c.classes = classes;
  if (name == "desk_cnn") {
    c.kind = GeneratorKind::cnn, c.layers = 3, c.hidden = 128;
  } else if (name == "desk_mlp") {
    c.kind = GeneratorKind::mlp, c.layers = 4, c.hidden = 128;
  } else if (name == "wide_cnn") {
    c.kind = GeneratorKind::cnn, c.layers = 3, c.hidden = 512;
  } else if (name == "deep_cnn") {
    c.kind = GeneratorKind::cnn, c.layers = 5, c.hidden = 192;
  } else if (name == "deep_mlp") {
    c.kind = GeneratorKind::mlp, c.layers = 7, c.hidden = 512;
  } else {
    throw ValidationError("unknown generator preset '" + name + "'");
  }
  return c;
}

inline const std::vector<std::string>& generator_preset_names() {
  static const std::vector<std::string> names{"desk_cnn", "desk_mlp", "wide_cnn", "deep_cnn", "deep_mlp"};
  return names;
}

/// The painting network: learnable coordinate encoder plus a stack of
/// same-size convolutions (1x1 for the MLP, 3x3 for the CNN) with leaky-ReLU
/// between layers and tanh at the end. Also carries the scene metadata the
/// network was trained against.
template <typename T>
class PaintingGenerator {
 public:
  GeneratorConfig config;
  PositionalEncoder positional;
  NonlinearEncoder<T> encoder;
  std::vector<nn::ConvParams<T>> layers;

  AABB bounds{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  std::vector<StyleVector> styles;
  /// Fallback RGB per class (index class_id - 1).
  std::vector<std::array<float, 3>> palette;

  struct Cache {
    std::vector<nn::Tensor<T>> inputs;  // input of each layer; hidden inputs are post-activation
    nn::Tensor<T> output;               // tanh output
  };

  /// Parameter gradients in `parameters()` order plus the input gradient.
  struct Grads {
    std::vector<nn::Tensor<T>> params;
    nn::Tensor<T> input;
  };

  std::size_t input_channels() const { return config.input_channels(); }

  /// Convolution weights and biases only.
  std::size_t body_parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.parameter_count();
    return n;
  }

  std::size_t parameter_count() const { return body_parameter_count() + encoder.parameter_count(); }

  /// Encoder weights first, then (kernel, bias) per layer.
  std::vector<nn::Tensor<T>*> parameters() {
    std::vector<nn::Tensor<T>*> p;
    if (config.ne_dim > 0) {
      p.push_back(&encoder.w1);
      p.push_back(&encoder.w2);
    }
    for (auto& l : layers) {
      p.push_back(&l.kernel);
      p.push_back(&l.bias);
    }
    return p;
  }

  std::vector<const nn::Tensor<T>*> parameters() const {
    std::vector<const nn::Tensor<T>*> p;
    for (auto* t : const_cast<PaintingGenerator*>(this)->parameters()) p.push_back(t);
    return p;
  }

  /// (H, W, D) input to (H, W, 3) tanh output.
  nn::Tensor<T> forward(const nn::Tensor<T>& x, Cache* cache = nullptr) const {
    if (x.rank() != 3 || x.dim(2) != input_channels()) {
      throw ShapeError("generator expects " + std::to_string(input_channels()) + " input channels, got " +
                       (x.rank() == 3 ? std::to_string(x.dim(2)) : nn::Tensor<T>::shape_string(x.shape())));
    }
    if (cache) cache->inputs.clear();
    const T slope = static_cast<T>(config.slope);
    nn::Tensor<T> h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      nn::Tensor<T> y = nn::conv2d(h, layers[i]);
      if (cache) cache->inputs.push_back(std::move(h));
      if (i + 1 < layers.size()) {
        for (auto& v : y.values()) v = v > T(0) ? v : slope * v;
      } else {
        for (auto& v : y.values()) v = std::tanh(v);
      }
      h = std::move(y);
    }
    if (cache) cache->output = h;
    return h;
  }

  Grads backward(const nn::Tensor<T>& grad_output, const Cache& cache, bool need_input_grad = true) const {
    nn::Tensor<T>::require_same_shape(grad_output, cache.output, "generator backward");
    const T slope = static_cast<T>(config.slope);
    Grads g;
    std::vector<nn::ConvGrads<T>> lg(layers.size());
    nn::Tensor<T> grad = nn::tanh_backward(grad_output, cache.output);
    for (std::size_t i = layers.size(); i-- > 0;) {
      const bool want_input = i > 0 || need_input_grad;
      lg[i] = nn::conv2d_backward(grad, cache.inputs[i], layers[i].kernel, layers[i].padding, want_input);
      if (i == 0) break;
      grad = std::move(lg[i].input);
      const auto& act = cache.inputs[i];  // leaky output keeps the sign of its input
      for (std::size_t j = 0; j < grad.size(); ++j) {
        if (!(act[j] > T(0))) grad[j] *= slope;
      }
    }
    if (config.ne_dim > 0) {
      g.params.emplace_back(encoder.w1.shape());
      g.params.emplace_back(encoder.w2.shape());
    }
    for (auto& l : lg) {
      g.params.push_back(std::move(l.kernel));
      g.params.push_back(std::move(l.bias));
    }
    if (need_input_grad) g.input = std::move(lg[0].input);
    return g;
  }

  /// Forward state of one view: the assembled input and network activations.
  struct ViewPass {
    AssembledInput<T> input;
    Cache cache;
  };

  ViewPass forward_view(const FrameMaps& frames, const StyleVector& z, bool allow_holes = false) const {
    check_view(frames, z);
    ViewPass v;
    v.input = assemble_input(frames, z, encoder, positional, bounds, allow_holes);
    forward(v.input.x, &v.cache);
    return v;
  }

  /// Parameter gradients for a view given dLoss/dImage, where the image is
  /// the [0, 1] color (y + 1) / 2.
  std::vector<nn::Tensor<T>> backward_view(const nn::Tensor<T>& grad_image, const ViewPass& v) const {
    nn::Tensor<T> grad_y = grad_image;
    grad_y *= T(0.5);
    const bool with_encoder = config.ne_dim > 0;
    auto g = backward(grad_y, v.cache, with_encoder);
    if (with_encoder) {
      auto eg = encoder_backward(g.input, v.input, encoder);
      g.params[0] = std::move(eg.w1);
      g.params[1] = std::move(eg.w2);
    }
    return std::move(g.params);
  }

  void check_view(const FrameMaps& frames, const StyleVector& z) const {
    if (frames.class_count != config.classes) {
      throw ValidationError("frames have " + std::to_string(frames.class_count) + " classes, painter expects " +
                            std::to_string(config.classes));
    }
    if (z.z.size() != static_cast<std::size_t>(config.style_dim)) {
      throw ValidationError("style vector has dimension " + std::to_string(z.z.size()) + ", painter expects " +
                            std::to_string(config.style_dim));
    }
  }

  bool operator==(const PaintingGenerator& o) const {
    if (!(config == o.config && encoder == o.encoder && bounds.min == o.bounds.min && bounds.max == o.bounds.max &&
          palette == o.palette && layers.size() == o.layers.size() && styles.size() == o.styles.size())) {
      return false;
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (!(layers[i].kernel == o.layers[i].kernel && layers[i].bias == o.layers[i].bias)) return false;
    }
    for (std::size_t i = 0; i < styles.size(); ++i) {
      if (styles[i].z != o.styles[i].z) return false;
    }
    return true;
  }
};

template <typename T>
PaintingGenerator<T> build_generator(const GeneratorConfig& config, std::uint64_t seed) {
  config.validate();
  PaintingGenerator<T> g;
  g.config = config;
  g.positional = config.make_positional();
  Rng rng(mix_seed(seed, 0x9e4));
  if (config.ne_dim > 0) {
    g.encoder = NonlinearEncoder<T>::make(static_cast<std::size_t>(config.ne_hidden),
                                          static_cast<std::size_t>(config.ne_dim), rng);
  }
  g.encoder.slope = static_cast<T>(config.slope);
  const std::size_t k = static_cast<std::size_t>(config.kernel());
  std::size_t cin = config.input_channels();
  for (int i = 0; i < config.layers; ++i) {
    const std::size_t cout = i + 1 == config.layers ? 3 : static_cast<std::size_t>(config.hidden);
    g.layers.push_back(nn::make_conv<T>(k, cin, cout, rng));
    cin = cout;
  }
  g.palette.resize(static_cast<std::size_t>(config.classes));
  for (int c = 1; c <= config.classes; ++c) g.palette[static_cast<std::size_t>(c - 1)] = class_palette_color(c);
  return g;
}

/// Maps a tanh output tensor to a [0, 1] image.
template <typename T>
Image to_image(const nn::Tensor<T>& y) {
  Image img(static_cast<int>(y.dim(1)), static_cast<int>(y.dim(0)));
  for (std::size_t i = 0; i < y.size(); ++i) img.rgb[i] = static_cast<float>((y[i] + T(1)) * T(0.5));
  return img;
}

/// I = G(X) as a [0, 1] RGB image.
template <typename T>
Image paint(const PaintingGenerator<T>& gen, const nn::Tensor<T>& x) {
  return to_image(gen.forward(x));
}

/// Rasterized view to image; uncovered pixels (allowed only with
/// `allow_holes`) are black.
template <typename T>
Image paint_view(const PaintingGenerator<T>& gen, const FrameMaps& frames, const StyleVector& z,
                 bool allow_holes = false) {
  gen.check_view(frames, z);
  const auto in = assemble_input(frames, z, gen.encoder, gen.positional, gen.bounds, allow_holes);
  Image img = paint(gen, in.x);
  for (std::size_t i = 0; i < frames.pixel_count(); ++i) {
    if (!frames.covered(i)) img.rgb[3 * i] = img.rgb[3 * i + 1] = img.rgb[3 * i + 2] = 0.0f;
  }
  return img;
}

}  // namespace scenepaint
