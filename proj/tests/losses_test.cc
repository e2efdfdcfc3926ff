// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pulsevoc/config.h"
#include "pulsevoc/error.h"
#include "pulsevoc/gradcheck.h"
#include "pulsevoc/losses.h"
#include "pulsevoc/nn/ops.h"
#include "test_util.h"

namespace pulsevoc {
namespace {

using nn::Tensor;
using nn::Var;

const double kLog2 = std::log(2.0);

MelParamSet small_set(int fft, int hop, int win, int mels, int sr = 8000) {
  return MelParamSet{fft, win, hop, mels, 20.0, sr / 2.0};
}

MelLossConfig small_config() {
  MelLossConfig c;
  c.param_sets = {small_set(256, 64, 256, 16), small_set(512, 128, 400, 24), small_set(128, 32, 128, 8)};
  return c;
}

ScoreSet scores(std::vector<std::size_t> sizes, double v) {
  ScoreSet s;
  for (auto n : sizes) s.scores.emplace_back(nn::Shape{1, n}, v);
  return s;
}

// Sawtooth with a strong positive excursion and shallow negative side.
Waveform sawtooth(std::size_t n, int sr, double period) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = std::fmod(static_cast<double>(i), period) / period;
    s[i] = 0.8 * ph * ph - 0.1;
  }
  return Waveform(std::move(s), sr);
}

Waveform add_dc(const Waveform& w, double c) {
  auto s = w.samples();
  for (auto& v : s) v += c;
  return Waveform(std::move(s), w.sample_rate());
}

Waveform negate(const Waveform& w) { return apply_gain(w, -1.0); }

TEST(MelLoss, IdentityIsExactlyZero) {
  const Waveform y = testing::noise(3000, 8000, 1);
  EXPECT_EQ(multi_mel_loss(y, y, small_config()), 0.0);
  const Waveform z = testing::noise(44100 / 4, 44100, 2);
  EXPECT_EQ(multi_mel_loss(z, z, MelLossConfig::full_band()), 0.0);
}

TEST(MelLoss, Symmetric) {
  const Waveform a = testing::noise(2500, 8000, 3), b = testing::sine(300, 2500, 8000);
  EXPECT_NEAR(multi_mel_loss(a, b, small_config()), multi_mel_loss(b, a, small_config()), 1e-12);
}

TEST(MelLoss, SineAgainstSilenceMatchesPerSetOracle) {
  const Waveform y = testing::sine(440, 2000, 8000);
  const Waveform silence = testing::constant(0.0, 2000, 8000);
  const auto cfg = small_config();
  double expected = 0.0;
  for (const auto& p : cfg.param_sets) expected += testing::brute_mel_mse(y, silence, p);
  expected /= cfg.param_sets.size();
  EXPECT_NEAR(multi_mel_loss(y, silence, cfg), expected, 1e-9 * expected);
  // Silence sits exactly on the log floor, so each set reduces to mean((log M - log eps)^2).
  for (const auto& p : cfg.param_sets) {
    const std::size_t frames = y.size() / p.hop_size + 1;
    double hand = 0.0;
    for (std::size_t t = 0; t < frames; ++t) {
      for (double v : testing::log_mel_frame(y.samples(), t, p, 8000)) hand += std::pow(v - std::log(kLogFloor), 2);
    }
    hand /= static_cast<double>(frames * p.n_mels);
    EXPECT_NEAR(testing::brute_mel_mse(y, silence, p), hand, 1e-12 * hand);
  }
}

TEST(MelLoss, SingleSetEqualsBruteForceOnRandomClips) {
  MelLossConfig cfg;
  cfg.param_sets = {small_set(256, 64, 200, 20)};
  for (std::uint64_t seed : {11, 12, 13}) {
    const Waveform a = testing::noise(1800, 8000, seed), b = testing::noise(1800, 8000, seed + 100, 0.3);
    EXPECT_NEAR(multi_mel_loss(a, b, cfg), testing::brute_mel_mse(a, b, cfg.param_sets[0]), 1e-9) << seed;
  }
}

TEST(MelLoss, ConditioningSetEqualsPlainMelMse) {
  const RunConfig rc = RunConfig::full_band();
  MelLossConfig cfg;
  cfg.param_sets = {rc.mel};
  const Waveform a = testing::noise(4410, 44100, 21), b = testing::sine(250, 4410, 44100, 0.3);
  const auto ma = mel_spectrogram(a, rc.mel), mb = mel_spectrogram(b, rc.mel);
  double acc = 0.0;
  for (std::size_t i = 0; i < ma.log_mels.data().size(); ++i) {
    acc += std::pow(ma.log_mels.data()[i] - mb.log_mels.data()[i], 2);
  }
  acc /= static_cast<double>(ma.log_mels.data().size());
  EXPECT_NEAR(multi_mel_loss(a, b, cfg), acc, 1e-9 * acc);
}

TEST(MelLoss, FullBandHasSixValidSets) {
  const auto cfg = MelLossConfig::full_band();
  EXPECT_EQ(cfg.param_sets.size(), 6u);
  EXPECT_NO_THROW(cfg.validate(44100));
}

TEST(MelLoss, Errors) {
  const Waveform a = testing::noise(1000, 8000, 1);
  EXPECT_THROW(multi_mel_loss(a, testing::noise(999, 8000, 2), small_config()), Error);
  EXPECT_THROW(multi_mel_loss(a, testing::noise(1000, 16000, 2), small_config()), Error);
  EXPECT_THROW(MelLossConfig{}.validate(8000), Error);
}

TEST(MelLoss, NonNegativeAndPositiveForDifferentSignals) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const double l = multi_mel_loss(testing::noise(1500, 8000, s), testing::noise(1500, 8000, s + 50), small_config());
    EXPECT_GT(l, 0.0);
  }
}

TEST(EnvelopeLoss, IdentityIsZero) {
  const Waveform y = testing::noise(3000, 8000, 4);
  EXPECT_EQ(envelope_loss(y, y, 512, 256), 0.0);
}

TEST(EnvelopeLoss, DcOffsetGivesTwiceTheOffset) {
  const Waveform y = testing::sine(441, 44100, 44100, 0.8);
  EXPECT_NEAR(envelope_loss(y, add_dc(y, 0.1), 512, 256), 0.2, 1e-4);
  EXPECT_NEAR(envelope_loss(y, add_dc(y, 0.03), 300, 100), 0.06, 1e-9);
}

TEST(EnvelopeLoss, PolarityReversalOfAsymmetricSignal) {
  const Waveform y = sawtooth(4000, 8000, 37.0);
  const double l = envelope_loss(y, negate(y), 512, 256);
  EXPECT_GT(l, 0.1);
  EXPECT_NEAR(l, testing::envelope_oracle(y, negate(y), 512, 256), 1e-12);
}

TEST(EnvelopeLoss, InvariantUnderJointPolarityReversal) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Waveform a = testing::noise(2000, 8000, s), b = sawtooth(2000, 8000, 20.0 + s);
    EXPECT_NEAR(envelope_loss(a, b, 256, 128), envelope_loss(negate(a), negate(b), 256, 128), 1e-12);
  }
}

TEST(EnvelopeLoss, MatchesMaxScanOracleAndZeroIffEnvelopesMatch) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 500 + rng() % 2000;
    const Waveform a = testing::noise(n, 8000, rng());
    Waveform b = testing::noise(n, 8000, rng());
    if (i % 3 == 0) {
      // Keep every window maximum and minimum while perturbing the interior.
      auto s = a.samples();
      for (auto& v : s) v *= 0.5;
      const auto hi = testing::max_scan(a.samples(), 256, 128);
      for (std::size_t t = 0; t < hi.size(); ++t) {
        for (std::size_t k = t * 128; k < std::min(n, t * 128 + 256); ++k) {
          if (a[k] == hi[t] || -a[k] == testing::max_scan(negate(a).samples(), 256, 128)[t]) s[k] = a[k];
        }
      }
      b = Waveform(std::move(s), 8000);
    }
    const double oracle = testing::envelope_oracle(a, b, 256, 128);
    const double got = envelope_loss(a, b, 256, 128);
    EXPECT_NEAR(got, oracle, 1e-12);
    EXPECT_EQ(got == 0.0, oracle == 0.0);
    if (i % 3 == 0) EXPECT_EQ(got, 0.0);
  }
}

TEST(EnvelopeLoss, Errors) {
  EXPECT_THROW(envelope_loss(testing::noise(100, 8000, 1), testing::noise(101, 8000, 1), 64, 32), Error);
  EXPECT_THROW(envelope_loss(testing::noise(100, 8000, 1), testing::noise(100, 8000, 1), 0, 32), Error);
}

TEST(Adversarial, ZeroScoresGiveTwoLogTwo) {
  EXPECT_NEAR(adversarial_g_loss(scores({7, 3, 5}, 0.0), scores({11, 2}, 0.0)), 2 * kLog2, 1e-12);
}

TEST(Adversarial, SaturatingLimits) {
  const double high = adversarial_g_loss(scores({4, 4}, 20.0), scores({3}, 20.0));
  EXPECT_NEAR(high, 2 * std::log1p(std::exp(-20.0)), 1e-15);
  const double low = adversarial_g_loss(scores({4}, -500.0), scores({3}, -500.0));
  EXPECT_NEAR(low, 1000.0, 1e-9);
  EXPECT_TRUE(std::isfinite(adversarial_g_loss(scores({4}, -1e6), scores({3}, 1e6))));
}

TEST(Adversarial, FamilyAveraging) {
  // Two sub-discriminators at 0 and 1 average before the families add.
  ScoreSet mpd;
  mpd.scores = {Tensor({2}, 0.0), Tensor({3}, 1.0)};
  const double expected = 0.5 * (kLog2 + std::log1p(std::exp(-1.0))) + kLog2;
  EXPECT_NEAR(adversarial_g_loss(mpd, scores({5}, 0.0)), expected, 1e-12);
  EXPECT_THROW(adversarial_g_loss(ScoreSet{}, scores({5}, 0.0)), Error);
}

TEST(GeneratorTotal, VanishesAtIdentityWithConfidentScores) {
  const Waveform y = testing::noise(2048, 8000, 5);
  const auto [total, m] = generator_total_loss(y, y, scores({4, 4}, 20.0), scores({6}, 20.0), {}, small_config(), {});
  EXPECT_LT(total, 1e-6 + 2 * std::log1p(std::exp(-20.0)));
  EXPECT_EQ(m.at("loss_mel"), 0.0);
  EXPECT_EQ(m.at("loss_env"), 0.0);
}

TEST(GeneratorTotal, TermsAndLambdaLinearity) {
  const Waveform y = testing::noise(2048, 8000, 6), z = testing::noise(2048, 8000, 7, 0.2);
  const auto fm = scores({4, 4}, 0.3), fr = scores({6}, -0.2);
  const auto [t1, m1] = generator_total_loss(y, z, fm, fr, LossWeights{1.0}, small_config(), {});
  const auto [t2, m2] = generator_total_loss(y, z, fm, fr, LossWeights{2.0}, small_config(), {});
  EXPECT_NEAR(m2.at("loss_mel"), 2 * m1.at("loss_mel"), 1e-12 * m1.at("loss_mel"));
  EXPECT_EQ(m1.at("loss_mel_raw"), m2.at("loss_mel_raw"));
  EXPECT_NEAR(t2 - t1, m1.at("loss_mel"), 1e-9);
  EXPECT_NEAR(t1, m1.at("loss_mel") + m1.at("loss_env") + m1.at("loss_adv_g"), 1e-12);
  EXPECT_NEAR(m1.at("loss_env"), envelope_loss(y, z, 512, 256), 1e-12);
  EXPECT_NEAR(m1.at("loss_mel_raw"), multi_mel_loss(y, z, small_config()), 1e-12);
  EXPECT_NEAR(m1.at("loss_adv_g"), adversarial_g_loss(fm, fr), 1e-12);
}

TEST(GeneratorTotal, ZeroLambdaLeavesEnvelopeAndAdversarial) {
  // The config rejects lambda = 0; the differentiable form accepts it for this identity.
  const Waveform y = testing::noise(1024, 8000, 8), z = testing::noise(1024, 8000, 9);
  const Var yv = nn::constant(Tensor({1, 1, 1024}, y.samples())), zv = nn::constant(Tensor({1, 1, 1024}, z.samples()));
  const std::vector<Var> fm = {nn::constant(Tensor({1, 5}, 0.4))}, fr = {nn::constant(Tensor({1, 3}, -0.4))};
  const auto loss = diff::generator_total_loss(yv, zv, 8000, fm, fr, LossWeights{0.0}, small_config(), {});
  EXPECT_EQ(loss.total.item(), loss.envelope.item() + loss.adversarial.item());
  EXPECT_THROW(LossWeights{0.0}.validate(), Error);
}

TEST(Discriminator, ZeroScores) {
  const auto [total, m] = discriminator_loss(scores({3, 4}, 0), scores({3, 4}, 0), scores({5}, 0), scores({5}, 0));
  EXPECT_NEAR(m.at("loss_mpd"), 2 * kLog2, 1e-12);
  EXPECT_NEAR(m.at("loss_mrd"), 2 * kLog2, 1e-12);
  EXPECT_NEAR(total, 4 * kLog2, 1e-12);
  EXPECT_NEAR(total, 2.77259, 1e-5);
}

TEST(Discriminator, PerfectDiscrimination) {
  const auto [total, m] =
      discriminator_loss(scores({3, 4}, 20), scores({3, 4}, -20), scores({5, 2}, 20), scores({5, 2}, -20));
  EXPECT_LT(total, 1e-7);
  EXPECT_GT(total, 0.0);
}

TEST(Discriminator, SwappingRealAndFakeIncreasesLoss) {
  const auto right = discriminator_loss(scores({3}, 1), scores({3}, -1), scores({2}, 1), scores({2}, -1)).first;
  const auto swapped = discriminator_loss(scores({3}, -1), scores({3}, 1), scores({2}, -1), scores({2}, 1)).first;
  EXPECT_GT(swapped, right);
}

TEST(Discriminator, CountMismatchErrors) {
  EXPECT_THROW(discriminator_loss(scores({3, 4}, 0), scores({3}, 0), scores({5}, 0), scores({5}, 0)), Error);
  EXPECT_THROW(discriminator_loss(scores({3}, 0), scores({3}, 0), scores({5}, 0), scores({5, 1}, 0)), Error);
  EXPECT_THROW(discriminator_loss(ScoreSet{}, ScoreSet{}, scores({5}, 0), scores({5}, 0)), Error);
}

TEST(Discriminator, HandComputedMixedScores) {
  ScoreSet real, fake;
  real.scores = {Tensor({2}, std::vector<double>{0.5, -1.0})};
  fake.scores = {Tensor({2}, std::vector<double>{2.0, 0.0})};
  auto sp = [](double x) { return std::log1p(std::exp(x)); };
  const double fam = 0.5 * (sp(-0.5) + sp(1.0)) + 0.5 * (sp(2.0) + sp(0.0));
  const auto [total, m] = discriminator_loss(real, fake, real, fake);
  EXPECT_NEAR(m.at("loss_mpd"), fam, 1e-12);
  EXPECT_NEAR(total, 2 * fam, 1e-12);
}

// Gradient checks against central differences on 1024-sample inputs.

Tensor random_signal(std::uint64_t seed, double amp = 0.5) {
  return Tensor({1, 1, 1024}, testing::noise(1024, 8000, seed, amp).samples());
}

TEST(LossGradients, MelLoss) {
  const auto cfg = small_config();
  for (std::uint64_t seed : {1, 2, 3}) {
    const Var y = nn::constant(random_signal(seed, 1.0));
    Var y_hat = nn::parameter(random_signal(seed + 10, 1.0));
    const Waveform w(y_hat.value().values(), 8000);
    const auto r = finite_difference_check(
        [&] { return diff::multi_mel_loss(y, y_hat, 8000, cfg); }, {y_hat},
        GradCheckOptions{.eps = 1e-3, .samples = 1024, .seed = seed, .include = testing::away_from_zero_bins(w, cfg, 0.02)});
    EXPECT_GT(r.checked, 100u);
    EXPECT_LE(r.max_rel_error, 1e-3) << r.worst_index << " " << r.worst_analytic << " " << r.worst_numeric;
  }
}

TEST(LossGradients, EnvelopeLoss) {
  const Var y = nn::constant(random_signal(4));
  Var y_hat = nn::parameter(random_signal(5, 0.4));
  const EnvelopeConfig env{128, 64};
  const auto r = finite_difference_check(
      [&] { return diff::envelope_loss(y, y_hat, env); }, {y_hat},
      GradCheckOptions{.eps = 1e-3, .samples = 1024, .seed = 6,
                       .include = testing::away_from_ties(y_hat.value().values(), env.win_size, env.hop_size, 3e-3)});
  EXPECT_GT(r.checked, 500u);
  EXPECT_LE(r.max_rel_error, 1e-3) << r.worst_index << " " << r.worst_analytic << " " << r.worst_numeric;
}

TEST(LossGradients, AdversarialAndDiscriminatorScores) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 2.0);
  auto rand_param = [&](std::size_t n) {
    Tensor t({1, n});
    for (auto& v : t.values()) v = g(rng);
    return nn::parameter(t);
  };
  std::vector<Var> fm = {rand_param(30), rand_param(17)}, fr = {rand_param(25)};
  std::vector<Var> rm = {rand_param(30), rand_param(17)}, rr = {rand_param(25)};
  const GradCheckOptions opts{.eps = 1e-3, .samples = 500, .seed = 8};
  const auto ra = finite_difference_check([&] { return diff::adversarial_g_loss(fm, fr); },
                                          {fm[0], fm[1], fr[0]}, opts);
  EXPECT_LE(ra.max_rel_error, 1e-3);
  const auto rd = finite_difference_check([&] { return diff::discriminator_loss(rm, fm, rr, fr).total; },
                                          {rm[0], rm[1], rr[0], fm[0], fm[1], fr[0]}, opts);
  EXPECT_LE(rd.max_rel_error, 1e-3);
  EXPECT_GT(rd.checked, 100u);
}

TEST(LossGradients, DiffMatchesPlainValues) {
  const Waveform a = testing::noise(1024, 8000, 10), b = testing::noise(1024, 8000, 11);
  const Var av = nn::constant(Tensor({1, 1, 1024}, a.samples())), bv = nn::constant(Tensor({1, 1, 1024}, b.samples()));
  EXPECT_EQ(diff::multi_mel_loss(av, bv, 8000, small_config()).item(), multi_mel_loss(a, b, small_config()));
  EXPECT_NEAR(diff::envelope_loss(av, bv, {256, 128}).item(), testing::envelope_oracle(a, b, 256, 128), 1e-12);
  EXPECT_THROW(diff::envelope_loss(av, nn::constant(Tensor({1, 1, 1000}, 0.0)), {256, 128}), Error);
}

TEST(LossGradients, BatchedMelLossAveragesItems) {
  const Waveform a = testing::noise(1024, 8000, 12), b = testing::noise(1024, 8000, 13);
  const Waveform c = testing::noise(1024, 8000, 14), d = testing::noise(1024, 8000, 15);
  std::vector<double> y = a.samples(), yh = b.samples();
  y.insert(y.end(), c.samples().begin(), c.samples().end());
  yh.insert(yh.end(), d.samples().begin(), d.samples().end());
  const double batched = diff::multi_mel_loss(nn::constant(Tensor({2, 1, 1024}, y)),
                                              nn::constant(Tensor({2, 1, 1024}, yh)), 8000, small_config())
                             .item();
  const double separate = 0.5 * (multi_mel_loss(a, b, small_config()) + multi_mel_loss(c, d, small_config()));
  EXPECT_NEAR(batched, separate, 1e-12 * separate);
}

}  // namespace
}  // namespace pulsevoc
