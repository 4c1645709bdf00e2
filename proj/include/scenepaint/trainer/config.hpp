#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "scenepaint/core/error.hpp"
#include "scenepaint/core/text_io.hpp"
#include "scenepaint/painter/generator.hpp"
#include "scenepaint/refgen/references.hpp"

namespace scenepaint {

enum class LossMode { recon_only, adv_only, full };

inline std::string to_string(LossMode m) {
  switch (m) {
    case LossMode::recon_only: return "recon_only";
    case LossMode::adv_only: return "adv_only";
    case LossMode::full: return "full";
  }
  return "?";
}

inline LossMode loss_mode_from_string(const std::string& s) {
  if (s == "recon_only") return LossMode::recon_only;
  if (s == "adv_only") return LossMode::adv_only;
  if (s == "full") return LossMode::full;
  throw ValidationError("unknown loss mode '" + s + "' (expected recon_only, adv_only or full)");
}

struct TrainingConfig {
  int batch = 4;
  int iterations = 20000;
  double lambda_adv = 10.0;
  double lr_g = 1e-3;
  double lr_d = 1e-4;
  double beta1 = 0.0;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 1;
  LossMode mode = LossMode::full;
  /// Indices into the camera and style lists; empty means all.
  std::vector<std::size_t> views;
  std::vector<std::size_t> styles;
  std::string preset = "desk_cnn";
  GeneratorConfig generator = generator_preset("desk_cnn", 14);
  MockReferenceOptions mock;
  /// Write a resumable training state every N iterations (0 = only at the end).
  int checkpoint_every = 0;

  /// lambda_adv = 0 turns full mode into recon_only exactly.
  bool uses_adversarial() const { return mode != LossMode::recon_only && lambda_adv > 0.0; }
  bool uses_recon() const { return mode != LossMode::adv_only; }

  void validate() const {
    auto need = [](bool ok, const std::string& what) {
      if (!ok) throw ValidationError("invalid training config: " + what);
    };
    need(batch >= 1, "batch must be >= 1");
    need(iterations >= 0, "iterations must be >= 0");
    need(lambda_adv >= 0.0 && std::isfinite(lambda_adv), "lambda_adv must be finite and >= 0");
    need(mode != LossMode::adv_only || lambda_adv > 0.0, "adv_only loss mode needs lambda_adv > 0");
    need(lr_g > 0.0 && lr_d > 0.0, "learning rates must be positive");
    need(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "Adam betas must be in [0, 1)");
    need(eps > 0.0, "Adam eps must be positive");
    need(mock.epsilon >= 0.0, "mock epsilon must be >= 0");
    need(checkpoint_every >= 0, "checkpoint_every must be >= 0");
    generator.validate();
  }
};

inline nlohmann::json generator_to_json(const GeneratorConfig& g) {
  return {{"kind", to_string(g.kind)},
          {"layers", g.layers},
          {"hidden", g.hidden},
          {"slope", g.slope},
          {"positional", to_string(g.positional)},
          {"frequencies", g.frequencies},
          {"fourier_features", g.fourier_features},
          {"fourier_seed", g.fourier_seed},
          {"ne_dim", g.ne_dim},
          {"ne_hidden", g.ne_hidden},
          {"style_dim", g.style_dim},
          {"classes", g.classes}};
}

inline nlohmann::json to_json(const TrainingConfig& c) {
  return {{"batch", c.batch},
          {"iterations", c.iterations},
          {"lambda_adv", c.lambda_adv},
          {"lr_g", c.lr_g},
          {"lr_d", c.lr_d},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"eps", c.eps},
          {"seed", c.seed},
          {"loss_mode", to_string(c.mode)},
          {"views", c.views},
          {"styles", c.styles},
          {"preset", c.preset},
          {"generator", generator_to_json(c.generator)},
          {"mock", {{"palette_seed", c.mock.palette_seed}, {"epsilon", c.mock.epsilon}, {"shading", c.mock.shading}}},
          {"checkpoint_every", c.checkpoint_every}};
}

/// Reads a config document. Unknown keys are rejected; `preset` is applied
/// first and explicit `generator` fields override it. `classes` is taken
/// from the scene and is not read here.
inline TrainingConfig training_config_from_json(const nlohmann::json& j, int classes) {
  static const std::vector<std::string> known{"batch", "iterations", "lambda_adv", "lr_g", "lr_d", "beta1",
                                              "beta2", "eps", "seed", "loss_mode", "views", "styles",
                                              "preset", "generator", "mock", "checkpoint_every"};
  if (!j.is_object()) throw ValidationError("training config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ValidationError("unknown training config key '" + key + "'");
    }
  }
  TrainingConfig c;
  try {
    c.batch = j.value("batch", c.batch);
    c.iterations = j.value("iterations", c.iterations);
    c.lambda_adv = j.value("lambda_adv", c.lambda_adv);
    c.lr_g = j.value("lr_g", c.lr_g);
    c.lr_d = j.value("lr_d", c.lr_d);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.eps = j.value("eps", c.eps);
    c.seed = j.value("seed", c.seed);
    c.mode = loss_mode_from_string(j.value("loss_mode", to_string(c.mode)));
    c.views = j.value("views", c.views);
    c.styles = j.value("styles", c.styles);
    c.preset = j.value("preset", c.preset);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.generator = generator_preset(c.preset, classes);
    if (j.contains("generator")) {
      const auto& g = j.at("generator");
      auto& o = c.generator;
      if (g.contains("kind")) o.kind = generator_kind_from_string(g.at("kind").get<std::string>());
      o.layers = g.value("layers", o.layers);
      o.hidden = g.value("hidden", o.hidden);
      o.slope = g.value("slope", o.slope);
      if (g.contains("positional")) o.positional = positional_kind_from_string(g.at("positional").get<std::string>());
      o.frequencies = g.value("frequencies", o.frequencies);
      o.fourier_features = g.value("fourier_features", o.fourier_features);
      o.fourier_seed = g.value("fourier_seed", o.fourier_seed);
      o.ne_dim = g.value("ne_dim", o.ne_dim);
      o.ne_hidden = g.value("ne_hidden", o.ne_hidden);
      o.style_dim = g.value("style_dim", o.style_dim);
    }
    if (j.contains("mock")) {
      const auto& m = j.at("mock");
      c.mock.palette_seed = m.value("palette_seed", c.mock.palette_seed);
      c.mock.epsilon = m.value("epsilon", c.mock.epsilon);
      c.mock.shading = m.value("shading", c.mock.shading);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("training config: ") + e.what());
  }
  c.generator.classes = classes;
  c.validate();
  return c;
}

inline TrainingConfig load_training_config(const std::filesystem::path& path, int classes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return training_config_from_json(j, classes);
}

}  // namespace scenepaint
