// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pulsevoc/nn/autograd.h"
#include "pulsevoc/signal.h"
#include "pulsevoc/types.h"

namespace pulsevoc {

// The averaged mel parameter sets of the multi-resolution mel loss.
struct MelLossConfig {
  std::vector<MelParamSet> param_sets;
  double log_floor = kLogFloor;

  void validate(int sample_rate) const;
  // Six sets at 44.1 kHz; the last three share FFT/hop/window with the
  // default MRD resolutions.
  static MelLossConfig full_band();
};

struct EnvelopeConfig {
  int win_size = 512;
  int hop_size = 256;

  void validate() const;
};

struct LossWeights {
  double lambda_mel = 45.0;

  void validate() const;
};

// One score tensor per sub-discriminator.
struct ScoreSet {
  std::vector<nn::Tensor> scores;
};

using Metrics = std::map<std::string, double>;

/// Mean over parameter sets of the mean squared log-mel difference.
double multi_mel_loss(const Waveform& y, const Waveform& y_hat, const MelLossConfig& cfg);

/// Mean absolute difference of max-pooled envelopes of the signals plus the
/// same for the polarity-reversed signals.
double envelope_loss(const Waveform& y, const Waveform& y_hat, int win_size, int hop_size);

/// Mean softplus(-s) per sub-discriminator, averaged within each family,
/// summed over the two families.
double adversarial_g_loss(const ScoreSet& fake_mpd, const ScoreSet& fake_mrd);

/// lambda * L_mel + L_envelope + adversarial term. Metrics carry loss_total,
/// loss_mel (weighted), loss_mel_raw, loss_env and loss_adv_g.
std::pair<double, Metrics> generator_total_loss(const Waveform& y, const Waveform& y_hat,
                                                const ScoreSet& fake_mpd, const ScoreSet& fake_mrd,
                                                const LossWeights& weights,
                                                const MelLossConfig& mel_cfg,
                                                const EnvelopeConfig& env_cfg);

/// L_MPD + L_MRD with each family term
/// (1/n) sum_i [mean softplus(-real_i) + mean softplus(fake_i)].
/// Metrics carry loss_d, loss_mpd and loss_mrd.
std::pair<double, Metrics> discriminator_loss(const ScoreSet& real_mpd, const ScoreSet& fake_mpd,
                                              const ScoreSet& real_mrd, const ScoreSet& fake_mrd);

// Differentiable forms over [B, 1, T] signals and score variables.
namespace diff {

nn::Var multi_mel_loss(const nn::Var& y, const nn::Var& y_hat, int sample_rate,
                       const MelLossConfig& cfg);

// Log-mel [B, n_mels, frames] of a [B, 1, T] signal.
nn::Var log_mel(const nn::Var& x, const MelParamSet& params, int sample_rate, double log_floor);

nn::Var envelope_loss(const nn::Var& y, const nn::Var& y_hat, const EnvelopeConfig& cfg);

nn::Var adversarial_g_loss(const std::vector<nn::Var>& fake_mpd,
                           const std::vector<nn::Var>& fake_mrd);

struct DiscriminatorLoss {
  nn::Var total;
  nn::Var mpd;
  nn::Var mrd;
};

DiscriminatorLoss discriminator_loss(const std::vector<nn::Var>& real_mpd,
                                     const std::vector<nn::Var>& fake_mpd,
                                     const std::vector<nn::Var>& real_mrd,
                                     const std::vector<nn::Var>& fake_mrd);

struct GeneratorLoss {
  nn::Var total;
  nn::Var mel;  // unweighted
  nn::Var envelope;
  nn::Var adversarial;
};

GeneratorLoss generator_total_loss(const nn::Var& y, const nn::Var& y_hat, int sample_rate,
                                   const std::vector<nn::Var>& fake_mpd,
                                   const std::vector<nn::Var>& fake_mrd,
                                   const LossWeights& weights, const MelLossConfig& mel_cfg,
                                   const EnvelopeConfig& env_cfg);

}  // namespace diff

}  // namespace pulsevoc
