#include <gtest/gtest.h>

#include <cmath>

#include "oracles/oracles.hpp"
#include "scenepaint/raster/rasterizer.hpp"
#include "scenepaint/trainer/train.hpp"
#include "test_util.hpp"

using namespace scenepaint;
using nn::Tensor;

namespace {

FrameMaps label_map(int w, int h, int classes, const std::vector<int>& labels) {
  FrameMaps f(w, h, classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    f.label[i] = static_cast<std::int16_t>(labels[i]);
    f.depth[i] = 1.0f;
  }
  return f;
}

FrameMaps random_labels(Rng& rng, int w, int h, int classes, bool with_holes) {
  std::vector<int> l(static_cast<std::size_t>(w * h));
  for (auto& v : l) v = static_cast<int>(rng.index(static_cast<std::size_t>(classes) + (with_holes ? 1 : 0))) +
                        (with_holes ? 0 : 1);
  return label_map(w, h, classes, l);
}

Tensor<double> random_tensor(Rng& rng, std::vector<std::size_t> shape, double a = 2.0) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(-a, a);
  return t;
}

std::vector<double> softmax_rows(const Tensor<double>& logits) {
  const std::size_t k = logits.dim(2), n = logits.size() / k;
  std::vector<double> p(logits.size());
  for (std::size_t i = 0; i < n; ++i) {
    double m = -1e300, s = 0.0;
    for (std::size_t c = 0; c < k; ++c) m = std::max(m, logits[i * k + c]);
    for (std::size_t c = 0; c < k; ++c) s += std::exp(logits[i * k + c] - m);
    for (std::size_t c = 0; c < k; ++c) p[i * k + c] = std::exp(logits[i * k + c] - m) / s;
  }
  return p;
}

std::vector<int> labels_of(const FrameMaps& f) { return {f.label.begin(), f.label.end()}; }

// A closed room seen by two cameras, two 4-d styles and mock references.
TrainingData tiny_data(double epsilon = 0.2) {
  const auto scene = test::closed_room(3);
  TrainingData d;
  d.bounds = scene.bounds();
  d.classes = 3;
  d.frames = {rasterize_view(scene, test::small_camera(Mat4::Identity(), 16, 12)),
              rasterize_view(scene, test::small_camera(rotation_about_axis(1, 50.0), 16, 12))};
  d.styles = sample_styles(2, 4, 9);
  d.references = make_mock_references(d.frames, d.styles, {3, epsilon, true});
  return d;
}

TrainingConfig tiny_config(LossMode mode, int iterations) {
  TrainingConfig c;
  c.batch = 2;
  c.iterations = iterations;
  c.mode = mode;
  c.seed = 21;
  c.generator.kind = GeneratorKind::mlp;
  c.generator.layers = 3;
  c.generator.hidden = 8;
  c.generator.ne_dim = 4;
  c.generator.ne_hidden = 4;
  c.generator.style_dim = 4;
  c.generator.classes = 3;
  return c;
}

std::uint64_t hash_params(std::vector<Tensor<float>*> params) {
  std::string bytes;
  for (const auto* p : params) {
    bytes.append(reinterpret_cast<const char*>(p->data()), p->size() * sizeof(float));
  }
  return fnv1a64(bytes);
}

}  // namespace

TEST(ClassWeights, SingleClassIsOne) {
  const auto f = label_map(2, 2, 3, {2, 2, 2, 2});
  const auto a = class_weights({&f}, 3);
  EXPECT_EQ(a, (std::vector<double>{0.0, 1.0, 0.0}));
}

TEST(ClassWeights, ThreeToOneSplit) {
  const auto f = label_map(2, 2, 2, {1, 1, 1, 2});
  const auto a = class_weights({&f}, 2);
  EXPECT_DOUBLE_EQ(a[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(a[1], 2.0);
}

TEST(ClassWeights, PoolsTheBatchAndIgnoresHoles) {
  const auto f = label_map(2, 1, 3, {1, 0});
  const auto g = label_map(2, 1, 3, {3, 3});
  const auto a = class_weights({&f, &g}, 3);
  EXPECT_DOUBLE_EQ(a[0], 3.0 / 2.0);
  EXPECT_EQ(a[1], 0.0);
  EXPECT_DOUBLE_EQ(a[2], 3.0 / 4.0);
}

TEST(ClassWeights, Errors) {
  const auto empty = label_map(2, 1, 3, {0, 0});
  EXPECT_THROW(class_weights({&empty}, 3), ValidationError);
  EXPECT_THROW(class_weights({}, 3), ValidationError);
}

TEST(ReconLoss, Examples) {
  Tensor<double> a({2, 3, 3}, 0.4), b({2, 3, 3}, 0.4);
  EXPECT_EQ(recon_loss<double>({a}, {b}).loss, 0.0);
  for (auto& v : b.values()) v += 0.1;
  EXPECT_NEAR(recon_loss<double>({b}, {a}).loss, 0.3, 1e-12);
  EXPECT_THROW(recon_loss<double>({a}, {Tensor<double>({3, 2, 3})}), ShapeError);
}

TEST(ReconLoss, FiniteDifferences) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Tensor<double>> p{random_tensor(rng, {3, 2, 3}), random_tensor(rng, {3, 2, 3})};
    const std::vector<Tensor<double>> r{random_tensor(rng, {3, 2, 3}), random_tensor(rng, {3, 2, 3})};
    const auto res = recon_loss(p, r);
    for (std::size_t b = 0; b < 2; ++b) {
      const auto num = oracle::numeric_gradient(p[b].storage(), [&] { return recon_loss(p, r).loss; }, 1e-7);
      EXPECT_LT(oracle::max_relative_error(res.grad[b].storage(), num), 1e-4);
    }
  }
}

TEST(AdvLoss, UniformLogitsGiveLogClassCount) {
  const int classes = 5;
  const auto f = label_map(3, 2, classes, {4, 4, 4, 4, 4, 4});
  const auto alpha = class_weights({&f}, classes);
  const Tensor<double> logits({2, 3, classes + 1}, 0.7);
  EXPECT_NEAR(adv_loss_gen<double>({logits}, {&f}, alpha).loss, std::log(classes + 1.0), 1e-12);
}

TEST(AdvLoss, MatchesTripleLoopAndFiniteDifferences) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int classes = 2 + static_cast<int>(rng.index(4));
    std::vector<FrameMaps> frames{random_labels(rng, 4, 3, classes, true), random_labels(rng, 4, 3, classes, true)};
    frames[0].label[0] = 1;
    const std::vector<const FrameMaps*> labels{&frames[0], &frames[1]};
    const auto alpha = class_weights(labels, classes);
    const std::size_t k = static_cast<std::size_t>(classes) + 1;
    std::vector<Tensor<double>> logits{random_tensor(rng, {3, 4, k}), random_tensor(rng, {3, 4, k})};
    const auto res = adv_loss_gen(logits, labels, alpha);
    const double expected = oracle::adv_gen_triple_loop({softmax_rows(logits[0]), softmax_rows(logits[1])},
                                                        {labels_of(frames[0]), labels_of(frames[1])}, alpha, classes);
    EXPECT_NEAR(res.loss, expected, 1e-6);
    for (std::size_t b = 0; b < 2; ++b) {
      const auto num = oracle::numeric_gradient(logits[b].storage(), [&] { return adv_loss_gen(logits, labels, alpha).loss; });
      EXPECT_LT(oracle::max_relative_error(res.grad[b].storage(), num), 1e-4);
    }
  }
}

TEST(AdvLoss, ShapeMismatch) {
  const auto f = label_map(2, 2, 3, {1, 1, 2, 3});
  const auto alpha = class_weights({&f}, 3);
  EXPECT_THROW(adv_loss_gen<double>({Tensor<double>({2, 2, 3})}, {&f}, alpha), ShapeError);
  EXPECT_THROW(adv_loss_gen<double>({Tensor<double>({2, 3, 4})}, {&f}, alpha), ShapeError);
}

TEST(DiscLoss, UniformLogitsMatchDirectEvaluation) {
  const int classes = 4;
  const auto f = label_map(4, 1, classes, {1, 1, 1, 3});
  const auto alpha = class_weights({&f}, classes);
  const Tensor<double> logits({1, 4, classes + 1}, -0.3);
  // each pixel: alpha * ln(C+1) for the real term and ln(C+1) for the fake term
  double weight = 0.0;
  for (auto l : f.label) weight += alpha[static_cast<std::size_t>(l - 1)];
  const double expected = std::log(classes + 1.0) * (1.0 + weight / 4.0);
  EXPECT_NEAR(disc_loss<double>({logits}, {logits}, {&f}, alpha).loss, expected, 1e-12);
  EXPECT_NEAR(expected, 2.0 * std::log(classes + 1.0), 1e-12);
}

TEST(DiscLoss, MatchesTripleLoopAndFiniteDifferences) {
  Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const int classes = 2 + static_cast<int>(rng.index(4));
    std::vector<FrameMaps> frames{random_labels(rng, 3, 3, classes, true), random_labels(rng, 3, 3, classes, true)};
    frames[1].label[4] = 2;
    const std::vector<const FrameMaps*> labels{&frames[0], &frames[1]};
    const auto alpha = class_weights(labels, classes);
    const std::size_t k = static_cast<std::size_t>(classes) + 1;
    std::vector<Tensor<double>> real{random_tensor(rng, {3, 3, k}), random_tensor(rng, {3, 3, k})};
    std::vector<Tensor<double>> fake{random_tensor(rng, {3, 3, k}), random_tensor(rng, {3, 3, k})};
    const auto res = disc_loss(real, fake, labels, alpha);
    const double expected = oracle::disc_triple_loop({softmax_rows(real[0]), softmax_rows(real[1])},
                                                     {softmax_rows(fake[0]), softmax_rows(fake[1])},
                                                     {labels_of(frames[0]), labels_of(frames[1])}, alpha, classes);
    EXPECT_NEAR(res.loss, expected, 1e-6);
    EXPECT_NEAR(res.real + res.fake, res.loss, 1e-12);
    auto loss = [&] { return disc_loss(real, fake, labels, alpha).loss; };
    for (std::size_t b = 0; b < 2; ++b) {
      EXPECT_LT(oracle::max_relative_error(res.grad_real[b].storage(), oracle::numeric_gradient(real[b].storage(), loss)), 1e-4);
      EXPECT_LT(oracle::max_relative_error(res.grad_fake[b].storage(), oracle::numeric_gradient(fake[b].storage(), loss)), 1e-4);
    }
  }
}

TEST(DiscLoss, SwappingInputsChangesTheLoss) {
  Rng rng(3);
  const auto f = random_labels(rng, 4, 4, 3, false);
  const auto alpha = class_weights({&f}, 3);
  const auto a = random_tensor(rng, {4, 4, 4}), b = random_tensor(rng, {4, 4, 4});
  const auto ab = disc_loss<double>({a}, {b}, {&f}, alpha), ba = disc_loss<double>({b}, {a}, {&f}, alpha);
  EXPECT_GT(std::abs(ab.loss - ba.loss), 1e-6);
}

TEST(Discriminator, OutputShapeAndErrors) {
  const auto d = Discriminator<float>::make(6, 1);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{16, 16}, {12, 20}, {9, 7}}) {
    const auto out = d.forward(Tensor<float>({h, w, 3}, 0.5f));
    EXPECT_EQ(out.shape(), (std::vector<std::size_t>{h, w, 7}));
  }
  EXPECT_THROW(d.forward(Tensor<float>({8, 8, 4})), ShapeError);
  EXPECT_THROW(d.forward(Tensor<float>({3, 8, 3})), ShapeError);
}

TEST(Discriminator, FiniteDifferences) {
  auto d = Discriminator<double>::make(2, 5);
  Rng rng(12);
  auto img = random_tensor(rng, {8, 6, 3}, 1.0);
  const auto w = random_tensor(rng, {8, 6, 3}, 1.0);
  auto loss = [&] {
    const auto out = d.forward(img);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += w[i] * out[i];
    return s;
  };
  Discriminator<double>::Cache cache;
  d.forward(img, &cache);
  const auto g = d.backward(w, cache, true);
  EXPECT_LT(oracle::max_relative_error(g.input.storage(), oracle::numeric_gradient(img.storage(), loss)), 1e-4);
  auto params = d.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    // the larger blocks are spot-checked on a prefix to keep the test fast
    auto& values = params[p]->storage();
    std::vector<double> prefix(values.begin(), values.begin() + std::min<std::size_t>(values.size(), 40));
    const std::size_t n = prefix.size();
    auto f = [&] {
      std::copy(prefix.begin(), prefix.end(), values.begin());
      return loss();
    };
    const auto keep = values;
    const auto num = oracle::numeric_gradient(prefix, f);
    values = keep;
    std::vector<double> analytic(g.params[p].storage().begin(), g.params[p].storage().begin() + static_cast<long>(n));
    EXPECT_LT(oracle::max_relative_error(analytic, num), 1e-4) << "param " << p;
  }
}

TEST(TrainingConfig, JsonRoundTripAndErrors) {
  TrainingConfig c = tiny_config(LossMode::full, 7);
  c.views = {0, 1};
  const auto back = training_config_from_json(to_json(c), 3);
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(training_config_from_json({{"batch", 2}, {"bogus", 1}}, 3), ValidationError);
  EXPECT_THROW(training_config_from_json({{"batch", 0}}, 3), ValidationError);
  EXPECT_THROW(training_config_from_json({{"loss_mode", "adv_only"}, {"lambda_adv", 0.0}}, 3), ValidationError);
  EXPECT_THROW(training_config_from_json({{"batch", "four"}}, 3), ValidationError);
  const auto preset = training_config_from_json({{"preset", "desk_mlp"}, {"generator", {{"hidden", 32}}}}, 3);
  EXPECT_EQ(preset.generator.kind, GeneratorKind::mlp);
  EXPECT_EQ(preset.generator.layers, 4);
  EXPECT_EQ(preset.generator.hidden, 32);
  EXPECT_EQ(preset.generator.classes, 3);
}

TEST(Train, LossesLoggedAndFinite) {
  const auto data = tiny_data();
  const auto full = train(data, tiny_config(LossMode::full, 4));
  ASSERT_EQ(full.history.size(), 4u);
  for (const auto& h : full.history) {
    EXPECT_TRUE(std::isfinite(h.rec) && std::isfinite(h.adv) && std::isfinite(h.disc));
  }
  const auto rec = train(data, tiny_config(LossMode::recon_only, 2));
  for (const auto& h : rec.history) {
    EXPECT_TRUE(std::isfinite(h.rec));
    EXPECT_TRUE(std::isnan(h.adv) && std::isnan(h.disc));
  }
  const auto csv = losses_csv(rec.history);
  EXPECT_EQ(csv.substr(0, 23), "iteration,rec,adv,disc\n");
  EXPECT_NE(csv.find(",,\n"), std::string::npos);
}

TEST(Train, GradientIsolation) {
  const auto data = tiny_data();
  const auto config = tiny_config(LossMode::full, 3);
  auto state = init_train_state(data, config);
  std::uint64_t gen_before = hash_params(state.generator.parameters());
  std::uint64_t disc_after_d = 0;
  int checks = 0;
  TrainCallbacks cb;
  cb.on_disc_step = [&](const TrainState& s) {
    auto& m = const_cast<TrainState&>(s);
    EXPECT_EQ(hash_params(m.generator.parameters()), gen_before);
    disc_after_d = hash_params(m.discriminator.parameters());
  };
  cb.on_iteration = [&](const TrainState& s, const LossRecord&) {
    auto& m = const_cast<TrainState&>(s);
    EXPECT_EQ(hash_params(m.discriminator.parameters()), disc_after_d);
    const auto now = hash_params(m.generator.parameters());
    EXPECT_NE(now, gen_before);
    gen_before = now;
    ++checks;
  };
  train_continue(state, data, config, cb);
  EXPECT_EQ(checks, 3);
}

TEST(Train, ZeroLambdaEqualsReconOnly) {
  const auto data = tiny_data();
  auto zero = tiny_config(LossMode::full, 4);
  zero.lambda_adv = 0.0;
  const auto a = train(data, zero);
  const auto b = train(data, tiny_config(LossMode::recon_only, 4));
  EXPECT_EQ(save_checkpoint(a.generator), save_checkpoint(b.generator));
  EXPECT_EQ(a.history, b.history);
  auto adv = tiny_config(LossMode::adv_only, 4);
  adv.lambda_adv = 0.0;
  EXPECT_THROW(train(data, adv), ValidationError);
}

TEST(Train, DeterministicAndResumable) {
  const auto data = tiny_data();
  const auto config = tiny_config(LossMode::full, 6);
  const auto a = train(data, config);
  const auto b = train(data, config);
  EXPECT_EQ(save_train_state(a), save_train_state(b));

  auto half = config;
  half.iterations = 3;
  const auto first = train(data, half);
  auto resumed = load_train_state(save_train_state(first));
  train_continue(resumed, data, config);
  EXPECT_EQ(save_train_state(resumed), save_train_state(a));
}

TEST(Train, StateFileCorruption) {
  const auto data = tiny_data();
  const auto s = train(data, tiny_config(LossMode::full, 1));
  auto bytes = save_train_state(s);
  EXPECT_EQ(save_train_state(load_train_state(bytes)), bytes);
  bytes[bytes.size() / 3] ^= 1;
  EXPECT_THROW(load_train_state(bytes), CorruptDataError);
  EXPECT_THROW(load_train_state(bytes.substr(0, 10)), CorruptDataError);
}

TEST(Train, CoverageErrorsBeforeTraining) {
  auto data = tiny_data();
  data.references.images.erase({1, 1});
  EXPECT_THROW(train(data, tiny_config(LossMode::full, 1)), ValidationError);

  auto holes = tiny_data();
  holes.frames[0].label[5] = 0;
  EXPECT_THROW(train(holes, tiny_config(LossMode::full, 1)), ValidationError);

  auto subset = tiny_data();
  subset.references.images.erase({1, 1});
  auto config = tiny_config(LossMode::full, 1);
  config.styles = {0};
  EXPECT_NO_THROW(train(subset, config));
  config.views = {2};
  EXPECT_THROW(train(subset, config), ValidationError);
}

TEST(Train, NonFiniteLossAbortsWithDump) {
  auto data = tiny_data();
  for (auto& [key, img] : data.references.images) img.rgb[0] = std::nanf("");
  bool dumped = false;
  TrainCallbacks cb;
  cb.on_divergence = [&](const TrainState& s) {
    dumped = true;
    EXPECT_EQ(s.iteration, 0u);
  };
  EXPECT_THROW(train(data, tiny_config(LossMode::recon_only, 3), cb), DivergenceError);
  EXPECT_TRUE(dumped);
}

TEST(Train, ReconOnlyReducesLoss) {
  const auto data = tiny_data(0.0);
  auto config = tiny_config(LossMode::recon_only, 150);
  config.batch = 4;
  const auto s = train(data, config);
  double early = 0.0, late = 0.0;
  for (int i = 0; i < 10; ++i) {
    early += s.history[static_cast<std::size_t>(i)].rec;
    late += s.history[s.history.size() - 1 - static_cast<std::size_t>(i)].rec;
  }
  EXPECT_LT(late, 0.5 * early);
}
