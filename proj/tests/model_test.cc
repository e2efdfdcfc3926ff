// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "pulsevoc/config.h"
#include "pulsevoc/error.h"
#include "pulsevoc/gradcheck.h"
#include "pulsevoc/model.h"
#include "pulsevoc/nn/ops.h"
#include "pulsevoc/train.h"
#include "test_util.h"

namespace pulsevoc {
namespace {

using nn::Tensor;
using nn::Var;

Tensor random_tensor(nn::Shape shape, std::uint64_t seed, double scale = 1.0) {
  Tensor t(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

std::vector<Var> vars_of(const nn::ParamList& params) {
  std::vector<Var> out;
  for (const auto& p : params) out.push_back(p.var);
  return out;
}

Generator toy_generator(std::uint64_t seed) {
  Rng rng(seed);
  return build_generator(GeneratorConfig::toy(), rng);
}

// Toy-scale batch cut from a harmonic test clip with real conditioning.
TrainBatch toy_batch(std::size_t n, std::uint64_t seed, std::size_t items = 1) {
  const RunConfig cfg = RunConfig::toy();
  std::vector<Waveform> targets;
  std::vector<Conditioning> conds;
  for (std::size_t b = 0; b < items; ++b) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double f = 180.0 + 40.0 * b + 60.0 * i / n;
      s[i] = 0.3 * std::sin(2 * std::numbers::pi * f * i / 8000.0) + 0.1 * std::sin(4 * std::numbers::pi * f * i / 8000.0);
    }
    targets.emplace_back(s, 8000);
    conds.push_back(extract_conditioning(targets.back(), cfg.features(), seed + b));
  }
  return make_batch(targets, conds);
}

TEST(GeneratorConfig, RateProductsAndMirroring) {
  EXPECT_EQ(GeneratorConfig{}.hop(), 256);
  EXPECT_NO_THROW(GeneratorConfig{}.validate(256));
  EXPECT_NO_THROW(GeneratorConfig::toy().validate(4));
  EXPECT_THROW(GeneratorConfig::toy().validate(256), Error);
  GeneratorConfig bad;
  bad.up_rates = {2, 2, 8, 8};
  EXPECT_THROW(bad.validate(256), Error);
}

TEST(GeneratorBuild, DeterministicPerSeed) {
  const Generator a = toy_generator(3), b = toy_generator(3), c = toy_generator(4);
  EXPECT_EQ(a.parameter_count(), b.parameter_count());
  EXPECT_GT(a.parameter_count(), 0u);
  const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].name, pb[i].name);
    EXPECT_EQ(pa[i].var.value(), pb[i].var.value()) << pa[i].name;
    any_diff |= !(pa[i].var.value() == pc[i].var.value());
  }
  EXPECT_TRUE(any_diff);
}

TEST(GeneratorForward, ToyShapeContract) {
  const Generator g = toy_generator(5);
  const Var templ = nn::constant(random_tensor({1, 1, 64}, 6));
  for (std::size_t frames : {16u, 17u}) {
    const Var y = g.forward(templ, nn::constant(random_tensor({1, 8, frames}, 7)));
    EXPECT_EQ(y.shape(), (nn::Shape{1, 1, 64}));
    for (double v : y.value().values()) {
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_LT(std::abs(v), 1.0);
    }
  }
}

TEST(GeneratorForward, ShapeErrorsNameExpectedLengths) {
  const Generator g = toy_generator(5);
  try {
    g.forward(nn::constant(random_tensor({1, 1, 64}, 6)), nn::constant(random_tensor({1, 8, 20}, 7)));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("16"), std::string::npos) << msg;
    EXPECT_NE(msg.find("17"), std::string::npos) << msg;
  }
  EXPECT_THROW(g.forward(nn::constant(random_tensor({1, 1, 62}, 6)), nn::constant(random_tensor({1, 8, 16}, 7))), Error);
  EXPECT_THROW(g.forward(nn::constant(random_tensor({1, 1, 64}, 6)), nn::constant(random_tensor({1, 5, 16}, 7))), Error);
}

TEST(GeneratorForward, LengthPreservedForManyLengths) {
  const Generator g = toy_generator(8);
  for (std::size_t frames : {1u, 2u, 5u, 33u, 100u}) {
    const std::size_t n = frames * 4;
    const Var y = g.forward(nn::constant(random_tensor({1, 1, n}, frames)), nn::constant(random_tensor({1, 8, frames}, 9)));
    EXPECT_EQ(y.dim(2), n);
  }
}

TEST(GeneratorForward, DefaultConfigLengthPreserved) {
  Rng rng(10);
  GeneratorConfig cfg;
  cfg.base_channels = 2;
  const Generator g(cfg, rng);
  const Var y = g.forward(nn::constant(random_tensor({1, 1, 512}, 11)), nn::constant(random_tensor({1, 128, 3}, 12)));
  EXPECT_EQ(y.dim(2), 512u);
}

TEST(GeneratorForward, BatchedEqualsSingles) {
  const Generator g = toy_generator(13);
  const Tensor t = random_tensor({2, 1, 40}, 14), m = random_tensor({2, 8, 11}, 15);
  const Tensor both = g.forward(nn::constant(t), nn::constant(m)).value();
  for (std::size_t b = 0; b < 2; ++b) {
    const Tensor tb({1, 1, 40}, std::vector<double>(t.values().begin() + b * 40, t.values().begin() + (b + 1) * 40));
    const Tensor mb({1, 8, 11}, std::vector<double>(m.values().begin() + b * 88, m.values().begin() + (b + 1) * 88));
    const Tensor one = g.forward(nn::constant(tb), nn::constant(mb)).value();
    for (std::size_t i = 0; i < 40; ++i) EXPECT_EQ(both[b * 40 + i], one[i]);
  }
}

TEST(GeneratorForward, ConditioningPathsAreLive) {
  const Generator g = toy_generator(16);
  const RunConfig cfg = RunConfig::toy();
  std::vector<double> s(800);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = i < 400 ? 0.4 * std::sin(2 * std::numbers::pi * 200 * i / 8000.0) : 0.0;
  const Waveform w(s, 8000);
  const auto c1 = extract_conditioning(w, cfg.features(), 1);
  const auto c2 = extract_conditioning(w, cfg.features(), 2);
  ASSERT_NE(c1.templ.samples, c2.templ.samples);
  const Waveform base = g.synthesize(c1.templ, c1.mel);
  EXPECT_EQ(base.size(), w.size());
  EXPECT_NE(g.synthesize(c2.templ, c1.mel).samples(), base.samples());
  MelSpectrogram zero = c1.mel;
  for (auto& v : zero.log_mels.data()) v = 0.0;
  EXPECT_NE(g.synthesize(c1.templ, zero).samples(), base.samples());
}

// Effective weight recomputed from the named direction and gain tensors.
void expect_weight_norm_holds(const Generator& g) {
  const auto convs = g.weight_normalized_convs();
  ASSERT_FALSE(convs.empty());
  for (const nn::Conv1d* c : convs) {
    nn::ParamList p;
    c->collect("c", p);
    const Tensor& v = p[0].var.value();
    const Tensor& gain = p[1].var.value();
    const Tensor w = c->weight().value();
    const std::size_t rows = v.dim(0), per = v.numel() / rows;
    for (std::size_t o = 0; o < rows; ++o) {
      double n = 0.0;
      for (std::size_t i = 0; i < per; ++i) n += v[o * per + i] * v[o * per + i];
      n = std::sqrt(n);
      for (std::size_t i = 0; i < per; ++i) ASSERT_NEAR(w[o * per + i], gain[o] * v[o * per + i] / n, 1e-6);
    }
  }
}

TEST(WeightNorm, HoldsAfterTrainingUpdates) {
  const RunConfig cfg = RunConfig::toy();
  ModelState state(cfg.generator, cfg.discriminator, cfg.adam(), 17);
  expect_weight_norm_holds(state.generator);
  const TrainBatch batch = toy_batch(1024, 18);
  for (int i = 0; i < 3; ++i) train_step(state, batch, cfg.losses());
  expect_weight_norm_holds(state.generator);
}

TEST(ReceptiveField, CoversDilationStack) {
  for (const auto& cfg : {GeneratorConfig{}, GeneratorConfig::toy()}) {
    const int k = *std::max_element(cfg.decoder_kernels.begin(), cfg.decoder_kernels.end());
    const int d = *std::max_element(cfg.dilations.begin(), cfg.dilations.end());
    EXPECT_GE(decoder_receptive_field(cfg), static_cast<std::size_t>(k * d * 3));
  }
}

TEST(ReceptiveField, OutputSampleReachesTemplateBeyondDecoderSpan) {
  // The template gradient of one output sample spans at least the decoder field.
  const Generator g = toy_generator(19);
  const std::size_t n = 1024, center = 512;
  Var templ = nn::parameter(random_tensor({1, 1, n}, 20));
  const Var y = g.forward(templ, nn::constant(random_tensor({1, 8, n / 4}, 21)));
  nn::backward(nn::mean_of({nn::narrow_last(y, center, 1)}));
  std::size_t lo = n, hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (templ.grad()[i] != 0.0) {
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
  }
  ASSERT_LE(lo, hi);
  EXPECT_GE(hi - lo + 1, decoder_receptive_field(g.config()));
}

TEST(Discriminators, ScoreSetCountsAndShapes) {
  Rng rng(22);
  const Discriminators d(DiscriminatorConfig{}, rng);
  const Waveform w = testing::noise(4096, 44100, 23);
  const auto mpd = mpd_forward(d, w), mrd = mrd_forward(d, w);
  EXPECT_EQ(mpd.scores.size(), 5u);
  EXPECT_EQ(mrd.scores.size(), 3u);
  const auto again = mpd_forward(d, testing::noise(4096, 44100, 24));
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(mpd.scores[i].shape(), again.scores[i].shape());
    for (double v : mpd.scores[i].values()) EXPECT_TRUE(std::isfinite(v));
  }
  for (const auto& s : mrd.scores) {
    for (double v : s.values()) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(Discriminators, PeriodFoldGridShape) {
  // Period p sees ceil(T / p) rows; strides (3,3,3,3,1) shrink rows only.
  Rng rng(25);
  const Discriminators d(DiscriminatorConfig::toy(), rng);
  const auto scores = d.mpd(nn::constant(random_tensor({1, 1, 1000}, 26)));
  const auto& periods = d.config().mpd_periods;
  for (std::size_t i = 0; i < periods.size(); ++i) {
    std::size_t rows = (1000 + periods[i] - 1) / periods[i];
    for (int s : {3, 3, 3, 3, 1}) rows = (rows + 2 * 2 - 5) / s + 1;
    EXPECT_EQ(scores[i].shape(), (nn::Shape{1, 1, rows, static_cast<std::size_t>(periods[i])})) << periods[i];
  }
}

TEST(Discriminators, TooShortInputErrors) {
  Rng rng(27);
  const Discriminators d(DiscriminatorConfig{}, rng);
  EXPECT_THROW(mrd_forward(d, testing::noise(1000, 44100, 1)), Error);
  EXPECT_THROW(mpd_forward(d, testing::noise(10, 44100, 1)), Error);
}

TEST(Discriminators, ConfigValidation) {
  DiscriminatorConfig c;
  c.mpd_periods = {2, 2};
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.mpd_periods = {1, 3};
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.mrd_param_sets = {{512, 0, 240}};
  EXPECT_THROW(c.validate(), Error);
}

TEST(TrainStep, FiniteMetricsAndDeterminism) {
  const RunConfig cfg = RunConfig::toy();
  auto run = [&] {
    ModelState state(cfg.generator, cfg.discriminator, cfg.adam(), 28);
    std::vector<Metrics> out;
    const TrainBatch batch = toy_batch(1024, 29, 2);
    for (int i = 0; i < 10; ++i) out.push_back(train_step(state, batch, cfg.losses()));
    return out;
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]) << "step " << i;
    for (const char* key : {"loss_total", "loss_mel", "loss_env", "loss_adv_g", "loss_d", "loss_mpd", "loss_mrd"}) {
      EXPECT_TRUE(std::isfinite(a[i].at(key))) << key;
    }
    EXPECT_EQ(a[i].at("step"), static_cast<double>(i));
  }
}

TEST(TrainStep, DiscriminatorUpdateDoesNotIncreaseItsLoss) {
  RunConfig cfg = RunConfig::toy();
  cfg.training.lr = 1e-4;
  ModelState state(cfg.generator, cfg.discriminator, cfg.adam(), 30);
  const TrainBatch batch = toy_batch(1024, 31);
  const double before = evaluate_discriminator_loss(state, batch);
  // Snapshot the generator so L_D is re-evaluated on the same fake batch.
  const auto gen = state.generator.parameters();
  std::vector<Tensor> saved;
  for (const auto& p : gen) saved.push_back(p.var.value());
  const Metrics m = train_step(state, batch, cfg.losses());
  EXPECT_NEAR(m.at("loss_d"), before, 1e-12);
  for (std::size_t i = 0; i < gen.size(); ++i) {
    Var v = gen[i].var;
    v.mutable_value() = saved[i];
  }
  EXPECT_LE(evaluate_discriminator_loss(state, batch), before);
}

TEST(TrainStep, SampleBatchShapes) {
  const RunConfig cfg = RunConfig::toy();
  ModelState state(cfg.generator, cfg.discriminator, cfg.adam(), 32);
  const std::vector<Waveform> sources = {testing::noise(6000, 8000, 33), testing::sine(220, 7000, 8000)};
  const TrainBatch b = sample_batch(state, sources, 3, 512, {-12, 12}, {}, cfg.features());
  EXPECT_EQ(b.size(), 3u);
  EXPECT_EQ(b.templates.shape(), (nn::Shape{3, 1, 512}));
  EXPECT_EQ(b.targets.shape(), (nn::Shape{3, 1, 512}));
  EXPECT_EQ(b.mels.shape(), (nn::Shape{3, 8, 512 / 4 + 1}));
  EXPECT_THROW(sample_batch(state, {}, 3, 512, {-12, 12}, {}, cfg.features()), Error);
}

TEST(GradCheck, QuadraticIsExact) {
  Var x = nn::parameter(random_tensor({200}, 34));
  const Var target = nn::constant(random_tensor({200}, 35));
  const auto r = finite_difference_check([&] { return nn::mse(x, target); }, {x}, GradCheckOptions{.samples = 200});
  EXPECT_EQ(r.checked, 200u);
  EXPECT_LT(r.max_rel_error, 1e-8);
}

TEST(GradCheck, ToyGeneratorThroughMelLoss) {
  const Generator g = toy_generator(36);
  const TrainBatch batch = toy_batch(512, 37);
  const Var templ = nn::constant(batch.templates), mel = nn::constant(batch.mels), y = nn::constant(batch.targets);
  MelLossConfig loss;
  loss.param_sets = {MelParamSet{64, 64, 16, 8, 20.0, 4000.0}, MelParamSet{128, 128, 32, 8, 20.0, 4000.0}};
  const auto r = finite_difference_check([&] { return diff::multi_mel_loss(y, g.forward(templ, mel), 8000, loss); },
                                         vars_of(g.parameters()), GradCheckOptions{.eps = 1e-3, .samples = 150, .seed = 38});
  EXPECT_GE(r.checked, 100u);
  EXPECT_LE(r.max_rel_error, 1e-3) << r.worst_param << ":" << r.worst_index << " " << r.worst_analytic << " "
                                   << r.worst_numeric;
}

TEST(GradCheck, ToyDiscriminatorsThroughDiscriminatorLoss) {
  Rng rng(39);
  const Discriminators d(DiscriminatorConfig::toy(), rng);
  const Var real = nn::constant(Tensor({1, 1, 600}, testing::noise(600, 8000, 40).samples()));
  const Var fake = nn::constant(Tensor({1, 1, 600}, testing::noise(600, 8000, 41, 0.2).samples()));
  const auto r = finite_difference_check(
      [&] { return diff::discriminator_loss(d.mpd(real), d.mpd(fake), d.mrd(real), d.mrd(fake)).total; },
      vars_of(d.parameters()), GradCheckOptions{.eps = 1e-3, .samples = 150, .seed = 42});
  EXPECT_GE(r.checked, 100u);
  EXPECT_LE(r.max_rel_error, 1e-3) << r.worst_param << ":" << r.worst_index << " " << r.worst_analytic << " "
                                   << r.worst_numeric;
}

}  // namespace
}  // namespace pulsevoc
