// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pulsevoc/losses.h"

#include <fmt/format.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "pulsevoc/error.h"
#include "pulsevoc/nn/ops.h"

namespace pulsevoc {

namespace {

using nn::Var;

MelParamSet make_set(int fft, int hop, int win, int mels) {
  MelParamSet p;
  p.fft_size = fft;
  p.hop_size = hop;
  p.win_size = win;
  p.n_mels = mels;
  p.f_min = 20.0;
  p.f_max = 22050.0;
  return p;
}

std::shared_ptr<const Matrix> cached_filterbank(const MelParamSet& p, int sample_rate) {
  using Key = std::tuple<int, int, int, double, double>;
  static std::mutex mu;
  static std::map<Key, std::shared_ptr<const Matrix>> cache;
  const Key key{p.fft_size, p.n_mels, sample_rate, p.f_min, p.f_max};
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto fb = std::make_shared<const Matrix>(mel_filterbank(p, sample_rate));
  cache.emplace(key, fb);
  return fb;
}

void require_same(const Waveform& y, const Waveform& y_hat, const char* op) {
  if (y.size() != y_hat.size()) {
    throw_invalid(fmt::format("{}: length mismatch {} vs {}", op, y.size(), y_hat.size()));
  }
  if (y.sample_rate() != y_hat.sample_rate()) {
    throw_invalid(fmt::format("{}: sample rate mismatch {} vs {}", op, y.sample_rate(),
                              y_hat.sample_rate()));
  }
}

Var as_batch(const Waveform& w) {
  return nn::constant(nn::Tensor({1, 1, w.size()}, w.samples()));
}

std::vector<Var> as_vars(const ScoreSet& s, const char* what) {
  if (s.scores.empty()) throw_invalid(fmt::format("{}: empty score set", what));
  std::vector<Var> out;
  out.reserve(s.scores.size());
  for (const auto& t : s.scores) {
    if (t.empty()) throw_invalid(fmt::format("{}: empty score tensor", what));
    out.push_back(nn::constant(t));
  }
  return out;
}

void require_signal_pair(const Var& y, const Var& y_hat, const char* op) {
  if (y.shape() != y_hat.shape() || y.value().ndim() != 3 || y.dim(1) != 1) {
    throw_invalid(fmt::format("{}: expected equal [B, 1, T] shapes, got {} and {}", op,
                              nn::shape_str(y.shape()), nn::shape_str(y_hat.shape())));
  }
}

Var family_term(const std::vector<Var>& real, const std::vector<Var>& fake, const char* family) {
  if (real.size() != fake.size() || real.empty()) {
    throw_invalid(fmt::format("discriminator_loss: {} has {} real and {} fake score maps", family,
                              real.size(), fake.size()));
  }
  std::vector<Var> terms;
  terms.reserve(real.size());
  for (std::size_t i = 0; i < real.size(); ++i) {
    terms.push_back(nn::add(nn::softplus_mean(real[i], -1.0), nn::softplus_mean(fake[i], 1.0)));
  }
  return nn::mean_of(terms);
}

Var generator_family_term(const std::vector<Var>& fake, const char* family) {
  if (fake.empty()) throw_invalid(fmt::format("adversarial_g_loss: empty {} score set", family));
  std::vector<Var> terms;
  terms.reserve(fake.size());
  for (const Var& s : fake) terms.push_back(nn::softplus_mean(s, -1.0));
  return nn::mean_of(terms);
}

}  // namespace

void MelLossConfig::validate(int sample_rate) const {
  if (param_sets.empty()) throw_invalid("mel_loss: at least one parameter set is required");
  for (const auto& p : param_sets) p.validate(sample_rate);
  if (!(log_floor > 0.0) || !std::isfinite(log_floor)) {
    throw_invalid(fmt::format("mel_loss.log_floor must be positive, got {}", log_floor));
  }
}

MelLossConfig MelLossConfig::full_band() {
  MelLossConfig cfg;
  cfg.param_sets = {make_set(512, 128, 512, 32),   make_set(1024, 256, 1024, 64),
                    make_set(2048, 512, 2048, 128), make_set(4096, 1024, 4096, 128),
                    make_set(1024, 120, 600, 64),   make_set(512, 50, 240, 32)};
  return cfg;
}

void EnvelopeConfig::validate() const {
  if (win_size <= 0 || hop_size <= 0) {
    throw_invalid(fmt::format("envelope: win {} and hop {} must be positive", win_size, hop_size));
  }
}

void LossWeights::validate() const {
  if (!(lambda_mel > 0.0) || !std::isfinite(lambda_mel)) {
    throw_invalid(fmt::format("loss.lambda_mel must be positive, got {}", lambda_mel));
  }
}

namespace diff {

Var log_mel(const Var& x, const MelParamSet& params, int sample_rate, double log_floor) {
  auto fb = cached_filterbank(params, sample_rate);
  Var mag = nn::stft_magnitude(x, params.fft_size, params.hop_size, params.win_size);
  return nn::log_floor(nn::mel_project(mag, *fb), log_floor);
}

Var multi_mel_loss(const Var& y, const Var& y_hat, int sample_rate, const MelLossConfig& cfg) {
  require_signal_pair(y, y_hat, "multi_mel_loss");
  cfg.validate(sample_rate);
  std::vector<Var> terms;
  terms.reserve(cfg.param_sets.size());
  for (const auto& p : cfg.param_sets) {
    terms.push_back(nn::mse(log_mel(y, p, sample_rate, cfg.log_floor),
                            log_mel(y_hat, p, sample_rate, cfg.log_floor)));
  }
  return nn::mean_of(terms);
}

Var envelope_loss(const Var& y, const Var& y_hat, const EnvelopeConfig& cfg) {
  require_signal_pair(y, y_hat, "envelope_loss");
  cfg.validate();
  Var pos = nn::mae(nn::max_pool_frames(y, cfg.win_size, cfg.hop_size),
                    nn::max_pool_frames(y_hat, cfg.win_size, cfg.hop_size));
  Var negv = nn::mae(nn::max_pool_frames(nn::neg(y), cfg.win_size, cfg.hop_size),
                     nn::max_pool_frames(nn::neg(y_hat), cfg.win_size, cfg.hop_size));
  return nn::add(pos, negv);
}

Var adversarial_g_loss(const std::vector<Var>& fake_mpd, const std::vector<Var>& fake_mrd) {
  return nn::add(generator_family_term(fake_mpd, "MPD"), generator_family_term(fake_mrd, "MRD"));
}

DiscriminatorLoss discriminator_loss(const std::vector<Var>& real_mpd, const std::vector<Var>& fake_mpd,
                                     const std::vector<Var>& real_mrd,
                                     const std::vector<Var>& fake_mrd) {
  DiscriminatorLoss out;
  out.mpd = family_term(real_mpd, fake_mpd, "MPD");
  out.mrd = family_term(real_mrd, fake_mrd, "MRD");
  out.total = nn::add(out.mpd, out.mrd);
  return out;
}

GeneratorLoss generator_total_loss(const Var& y, const Var& y_hat, int sample_rate,
                                   const std::vector<Var>& fake_mpd, const std::vector<Var>& fake_mrd,
                                   const LossWeights& weights, const MelLossConfig& mel_cfg,
                                   const EnvelopeConfig& env_cfg) {
  if (!(weights.lambda_mel >= 0.0)) {
    throw_invalid(fmt::format("loss.lambda_mel must be non-negative, got {}", weights.lambda_mel));
  }
  GeneratorLoss out;
  out.mel = multi_mel_loss(y, y_hat, sample_rate, mel_cfg);
  out.envelope = envelope_loss(y, y_hat, env_cfg);
  out.adversarial = adversarial_g_loss(fake_mpd, fake_mrd);
  out.total = nn::add(nn::add(nn::scale(out.mel, weights.lambda_mel), out.envelope), out.adversarial);
  return out;
}

}  // namespace diff

double multi_mel_loss(const Waveform& y, const Waveform& y_hat, const MelLossConfig& cfg) {
  require_same(y, y_hat, "multi_mel_loss");
  return diff::multi_mel_loss(as_batch(y), as_batch(y_hat), y.sample_rate(), cfg).item();
}

double envelope_loss(const Waveform& y, const Waveform& y_hat, int win_size, int hop_size) {
  require_same(y, y_hat, "envelope_loss");
  return diff::envelope_loss(as_batch(y), as_batch(y_hat), EnvelopeConfig{win_size, hop_size}).item();
}

double adversarial_g_loss(const ScoreSet& fake_mpd, const ScoreSet& fake_mrd) {
  return diff::adversarial_g_loss(as_vars(fake_mpd, "adversarial_g_loss"),
                                  as_vars(fake_mrd, "adversarial_g_loss"))
      .item();
}

std::pair<double, Metrics> generator_total_loss(const Waveform& y, const Waveform& y_hat,
                                                const ScoreSet& fake_mpd, const ScoreSet& fake_mrd,
                                                const LossWeights& weights,
                                                const MelLossConfig& mel_cfg,
                                                const EnvelopeConfig& env_cfg) {
  require_same(y, y_hat, "generator_total_loss");
  const auto loss = diff::generator_total_loss(
      as_batch(y), as_batch(y_hat), y.sample_rate(), as_vars(fake_mpd, "generator_total_loss"),
      as_vars(fake_mrd, "generator_total_loss"), weights, mel_cfg, env_cfg);
  Metrics m;
  m["loss_total"] = loss.total.item();
  m["loss_mel"] = weights.lambda_mel * loss.mel.item();
  m["loss_mel_raw"] = loss.mel.item();
  m["loss_env"] = loss.envelope.item();
  m["loss_adv_g"] = loss.adversarial.item();
  return {m["loss_total"], m};
}

std::pair<double, Metrics> discriminator_loss(const ScoreSet& real_mpd, const ScoreSet& fake_mpd,
                                              const ScoreSet& real_mrd, const ScoreSet& fake_mrd) {
  const auto loss = diff::discriminator_loss(
      as_vars(real_mpd, "discriminator_loss"), as_vars(fake_mpd, "discriminator_loss"),
      as_vars(real_mrd, "discriminator_loss"), as_vars(fake_mrd, "discriminator_loss"));
  Metrics m;
  m["loss_d"] = loss.total.item();
  m["loss_mpd"] = loss.mpd.item();
  m["loss_mrd"] = loss.mrd.item();
  return {m["loss_d"], m};
}

}  // namespace pulsevoc
