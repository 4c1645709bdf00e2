#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "scenepaint/core/binary_io.hpp"
#include "scenepaint/painter/checkpoint.hpp"
#include "scenepaint/tensornet/adam.hpp"
#include "scenepaint/trainer/config.hpp"
#include "scenepaint/trainer/discriminator.hpp"
#include "scenepaint/trainer/losses.hpp"

namespace scenepaint {

/// Losses after one iteration; inactive terms are NaN.
struct LossRecord {
  std::uint64_t iteration = 0;
  double rec = std::numeric_limits<double>::quiet_NaN();
  double adv = std::numeric_limits<double>::quiet_NaN();
  double disc = std::numeric_limits<double>::quiet_NaN();

  bool operator==(const LossRecord& o) const {
    auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
    return iteration == o.iteration && same(rec, o.rec) && same(adv, o.adv) && same(disc, o.disc);
  }
};

/// Everything needed to continue a run exactly where it stopped.
struct TrainState {
  PaintingGenerator<float> generator;
  Discriminator<float> discriminator;
  nn::AdamState<float> adam_g;
  nn::AdamState<float> adam_d;
  std::string rng_state;
  std::uint64_t iteration = 0;
  std::vector<LossRecord> history;
};

/// Inputs of a training run. Frames must be fully covered.
struct TrainingData {
  AABB bounds;
  int classes = 0;
  std::vector<FrameMaps> frames;
  std::vector<StyleVector> styles;
  ReferenceSet references;
};

struct TrainCallbacks {
  /// Called after every iteration.
  std::function<void(const TrainState&, const LossRecord&)> on_iteration;
  /// Called every `checkpoint_every` iterations.
  std::function<void(const TrainState&)> on_checkpoint;
  /// Called between the discriminator and the generator update.
  std::function<void(const TrainState&)> on_disc_step;
  /// Called with the last consistent state before a divergence error.
  std::function<void(const TrainState&)> on_divergence;
};

namespace detail {

inline void write_adam(BinaryWriter& w, const nn::AdamState<float>& a) {
  w.f64(a.config.lr);
  w.f64(a.config.beta1);
  w.f64(a.config.beta2);
  w.f64(a.config.eps);
  w.u64(a.step);
  w.u32(static_cast<std::uint32_t>(a.m.size()));
  for (std::size_t i = 0; i < a.m.size(); ++i) {
    write_tensor(w, a.m[i]);
    write_tensor(w, a.v[i]);
  }
}

inline void read_adam(BinaryReader& r, nn::AdamState<float>& a) {
  a.config.lr = r.f64();
  a.config.beta1 = r.f64();
  a.config.beta2 = r.f64();
  a.config.eps = r.f64();
  a.step = r.u64();
  if (r.u32() != a.m.size()) throw CorruptDataError("training state: optimizer block count");
  for (std::size_t i = 0; i < a.m.size(); ++i) {
    read_tensor_into(r, a.m[i]);
    read_tensor_into(r, a.v[i]);
  }
}

inline nn::Tensor<float> image_tensor(const Image& img) {
  return nn::Tensor<float>({static_cast<std::size_t>(img.height), static_cast<std::size_t>(img.width), 3}, img.rgb);
}

inline void accumulate(std::vector<nn::Tensor<float>>& sum, std::vector<nn::Tensor<float>>&& add) {
  if (sum.empty()) {
    sum = std::move(add);
    return;
  }
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += add[i];
}

}  // namespace detail

inline constexpr char kTrainStateMagic[4] = {'S', 'P', 'T', 'S'};
inline constexpr std::uint32_t kTrainStateVersion = 1;

inline std::string save_train_state(const TrainState& s) {
  BinaryWriter w;
  w.bytes(std::string_view(kTrainStateMagic, 4));
  w.u32(kTrainStateVersion);
  w.string(save_checkpoint(s.generator));
  w.i32(s.discriminator.classes);
  auto& disc = const_cast<Discriminator<float>&>(s.discriminator);
  const auto dp = disc.parameters();
  w.u32(static_cast<std::uint32_t>(dp.size()));
  for (const auto* p : dp) detail::write_tensor(w, *p);
  detail::write_adam(w, s.adam_g);
  detail::write_adam(w, s.adam_d);
  w.string(s.rng_state);
  w.u64(s.iteration);
  w.u64(s.history.size());
  for (const auto& h : s.history) {
    w.u64(h.iteration);
    w.f64(h.rec);
    w.f64(h.adv);
    w.f64(h.disc);
  }
  w.u64(fnv1a64(w.data()));
  return w.take();
}

inline TrainState load_train_state(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 4) != std::string_view(kTrainStateMagic, 4)) {
    throw CorruptDataError("not a training state file (bad magic)");
  }
  BinaryReader head(bytes.substr(4, 4));
  const auto version = head.u32();
  if (version != kTrainStateVersion) {
    throw ValidationError("unsupported training state version " + std::to_string(version));
  }
  BinaryReader tail(bytes.substr(bytes.size() - 8));
  if (tail.u64() != fnv1a64(bytes.substr(0, bytes.size() - 8))) {
    throw CorruptDataError("training state checksum mismatch (truncated or corrupted payload)");
  }
  BinaryReader r(bytes.substr(8, bytes.size() - 16));
  TrainState s;
  s.generator = load_checkpoint<float>(r.string());
  s.discriminator = Discriminator<float>::make(r.i32(), 0);
  auto dp = s.discriminator.parameters();
  if (r.u32() != dp.size()) throw CorruptDataError("training state: discriminator block count");
  for (auto* p : dp) detail::read_tensor_into(r, *p);
  s.adam_g = nn::AdamState<float>({}, s.generator.parameters());
  s.adam_d = nn::AdamState<float>({}, dp);
  detail::read_adam(r, s.adam_g);
  detail::read_adam(r, s.adam_d);
  s.rng_state = r.string();
  s.iteration = r.u64();
  const auto n = r.u64();
  if (n > r.remaining() / 32) throw CorruptDataError("truncated payload");
  s.history.resize(n);
  for (auto& h : s.history) {
    h.iteration = r.u64();
    h.rec = r.f64();
    h.adv = r.f64();
    h.disc = r.f64();
  }
  if (!r.at_end()) throw CorruptDataError("training state: trailing bytes");
  return s;
}

inline std::vector<std::size_t> resolve_indices(const std::vector<std::size_t>& requested, std::size_t count,
                                                const char* what) {
  if (requested.empty()) {
    std::vector<std::size_t> all(count);
    for (std::size_t i = 0; i < count; ++i) all[i] = i;
    return all;
  }
  for (auto i : requested) {
    if (i >= count) throw ValidationError(std::string(what) + " index " + std::to_string(i) + " out of range");
  }
  return requested;
}

/// Checks that the data can feed the configured run.
inline void validate_training_data(const TrainingData& data, const TrainingConfig& config) {
  config.validate();
  if (data.frames.empty()) throw ValidationError("no training views");
  validate_styles(data.styles);
  if (data.styles.front().dim() != static_cast<std::size_t>(config.generator.style_dim)) {
    throw ValidationError("style vectors have dimension " + std::to_string(data.styles.front().dim()) +
                          ", generator expects " + std::to_string(config.generator.style_dim));
  }
  if (!data.bounds.has_positive_extent()) throw ValidationError("training bounds have zero extent");
  const auto views = resolve_indices(config.views, data.frames.size(), "view");
  const auto styles = resolve_indices(config.styles, data.styles.size(), "style");
  for (auto v : views) {
    const auto& f = data.frames[v];
    if (f.class_count != data.classes) throw ValidationError("view " + std::to_string(v) + " has a different class count");
    if (!f.fully_covered()) {
      throw ValidationError("view " + std::to_string(v) + " has " + std::to_string(f.pixel_count() - f.covered_count()) +
                            " uncovered pixels; training views must be fully covered");
    }
  }
  data.references.require(views, styles, data.frames[views.front()].width, data.frames[views.front()].height);
}

/// Fresh state: seeded generator and discriminator, zero optimizer moments.
inline TrainState init_train_state(const TrainingData& data, const TrainingConfig& config) {
  validate_training_data(data, config);
  TrainState s;
  s.generator = build_generator<float>(config.generator, mix_seed(config.seed, 1));
  s.generator.bounds = data.bounds;
  s.generator.styles = data.styles;
  // fallback colors: mean reference color per class over the first style
  const auto views = resolve_indices(config.views, data.frames.size(), "view");
  const auto styles = resolve_indices(config.styles, data.styles.size(), "style");
  std::vector<std::array<double, 4>> sums(static_cast<std::size_t>(data.classes), {0, 0, 0, 0});
  for (auto v : views) {
    const auto& img = data.references.at(v, styles.front());
    const auto& f = data.frames[v];
    for (std::size_t i = 0; i < f.pixel_count(); ++i) {
      auto& acc = sums[static_cast<std::size_t>(f.label[i] - 1)];
      for (int ch = 0; ch < 3; ++ch) acc[ch] += img.at(i, ch);
      acc[3] += 1.0;
    }
  }
  for (std::size_t c = 0; c < sums.size(); ++c) {
    if (sums[c][3] == 0.0) continue;
    for (int ch = 0; ch < 3; ++ch) s.generator.palette[c][ch] = static_cast<float>(sums[c][ch] / sums[c][3]);
  }
  s.discriminator = Discriminator<float>::make(data.classes, mix_seed(config.seed, 2));
  s.adam_g = nn::AdamState<float>({config.lr_g, config.beta1, config.beta2, config.eps}, s.generator.parameters());
  s.adam_d = nn::AdamState<float>({config.lr_d, config.beta1, config.beta2, config.eps}, s.discriminator.parameters());
  s.rng_state = Rng(mix_seed(config.seed, 3)).state();
  return s;
}

/// Runs iterations until `config.iterations` is reached, continuing from
/// `state`. Each iteration samples B (view, style) pairs, takes one
/// discriminator step on its loss and then one generator step on
/// L_rec + lambda * L_adv, both on the same batch.
inline void train_continue(TrainState& state, const TrainingData& data, const TrainingConfig& config,
                           const TrainCallbacks& callbacks = {}) {
  validate_training_data(data, config);
  if (state.generator.config != config.generator) throw ValidationError("training state generator differs from config");
  const auto views = resolve_indices(config.views, data.frames.size(), "view");
  const auto styles = resolve_indices(config.styles, data.styles.size(), "style");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (auto v : views) {
    for (auto s : styles) pairs.emplace_back(v, s);
  }
  std::map<std::pair<std::size_t, std::size_t>, nn::Tensor<float>> refs;
  for (const auto& p : pairs) refs[p] = detail::image_tensor(data.references.at(p.first, p.second));

  Rng rng;
  rng.set_state(state.rng_state);
  auto& gen = state.generator;
  auto& disc = state.discriminator;
  const auto batch = static_cast<std::size_t>(config.batch);
  const float lambda = static_cast<float>(config.lambda_adv);

  while (state.iteration < static_cast<std::uint64_t>(config.iterations)) {
    std::vector<std::pair<std::size_t, std::size_t>> picked(batch);
    for (auto& p : picked) p = pairs[rng.index(pairs.size())];

    std::vector<const FrameMaps*> labels;
    std::vector<PaintingGenerator<float>::ViewPass> passes;
    std::vector<nn::Tensor<float>> painted, targets;
    for (const auto& [v, s] : picked) {
      labels.push_back(&data.frames[v]);
      passes.push_back(gen.forward_view(data.frames[v], data.styles[s]));
      nn::Tensor<float> p = passes.back().cache.output;
      for (auto& x : p.values()) x = (x + 1.0f) * 0.5f;
      painted.push_back(std::move(p));
      targets.push_back(refs.at({v, s}));
    }

    LossRecord record;
    record.iteration = state.iteration + 1;
    std::vector<nn::Tensor<float>> grad_painted;
    for (const auto& p : painted) grad_painted.emplace_back(p.shape());

    if (config.uses_adversarial()) {
      const auto alpha = class_weights(labels, data.classes);
      // discriminator step; painted images are constants here
      std::vector<Discriminator<float>::Cache> real_cache(batch), fake_cache(batch);
      std::vector<nn::Tensor<float>> real_logits, fake_logits;
      for (std::size_t b = 0; b < batch; ++b) {
        real_logits.push_back(disc.forward(targets[b], &real_cache[b]));
        fake_logits.push_back(disc.forward(painted[b], &fake_cache[b]));
      }
      const auto dl = disc_loss(real_logits, fake_logits, labels, alpha);
      record.disc = dl.loss;
      std::vector<nn::Tensor<float>> dgrads;
      for (std::size_t b = 0; b < batch; ++b) {
        detail::accumulate(dgrads, disc.backward(dl.grad_real[b], real_cache[b], false).params);
        detail::accumulate(dgrads, disc.backward(dl.grad_fake[b], fake_cache[b], false).params);
      }
      if (std::isfinite(record.disc)) nn::adam_step(disc.parameters(), dgrads, state.adam_d);
      if (callbacks.on_disc_step) callbacks.on_disc_step(state);

      // generator adversarial term through the updated discriminator
      std::vector<nn::Tensor<float>> logits;
      for (std::size_t b = 0; b < batch; ++b) logits.push_back(disc.forward(painted[b], &fake_cache[b]));
      const auto al = adv_loss_gen(logits, labels, alpha);
      record.adv = al.loss;
      for (std::size_t b = 0; b < batch; ++b) {
        auto gi = disc.backward(al.grad[b], fake_cache[b], true).input;
        gi *= lambda;
        grad_painted[b] += gi;
      }
    }

    const auto rl = recon_loss(painted, targets);
    record.rec = rl.loss;
    if (config.uses_recon()) {
      for (std::size_t b = 0; b < batch; ++b) grad_painted[b] += rl.grad[b];
    }

    const bool finite = std::isfinite(record.rec) && (!config.uses_adversarial() ||
                                                      (std::isfinite(record.adv) && std::isfinite(record.disc)));
    if (!finite) {
      state.rng_state = rng.state();
      if (callbacks.on_divergence) callbacks.on_divergence(state);
      throw DivergenceError("non-finite loss at iteration " + std::to_string(record.iteration) + " (rec " +
                            format_number(record.rec) + ", adv " + format_number(record.adv) + ", disc " +
                            format_number(record.disc) + ")");
    }

    std::vector<nn::Tensor<float>> ggrads;
    for (std::size_t b = 0; b < batch; ++b) detail::accumulate(ggrads, gen.backward_view(grad_painted[b], passes[b]));
    nn::adam_step(gen.parameters(), ggrads, state.adam_g);

    ++state.iteration;
    state.history.push_back(record);
    state.rng_state = rng.state();
    if (callbacks.on_iteration) callbacks.on_iteration(state, record);
    if (config.checkpoint_every > 0 && state.iteration % static_cast<std::uint64_t>(config.checkpoint_every) == 0 &&
        callbacks.on_checkpoint) {
      callbacks.on_checkpoint(state);
    }
  }
}

inline TrainState train(const TrainingData& data, const TrainingConfig& config, const TrainCallbacks& callbacks = {}) {
  auto state = init_train_state(data, config);
  train_continue(state, data, config, callbacks);
  return state;
}

/// Per-iteration losses as CSV; inactive terms are empty fields.
inline std::string losses_csv(const std::vector<LossRecord>& history) {
  std::string out = "iteration,rec,adv,disc\n";
  auto field = [](double v) { return std::isnan(v) ? std::string() : format_number(v); };
  for (const auto& h : history) {
    out += std::to_string(h.iteration) + "," + field(h.rec) + "," + field(h.adv) + "," + field(h.disc) + "\n";
  }
  return out;
}

}  // namespace scenepaint
