// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <vector>

#include "pulsevoc/augment.h"
#include "pulsevoc/losses.h"
#include "pulsevoc/model.h"
#include "pulsevoc/nn/optim.h"
#include "pulsevoc/pitch.h"
#include "pulsevoc/rng.h"
#include "pulsevoc/speech_template.h"

namespace pulsevoc {

// Everything needed to turn a waveform into generator inputs.
struct FeatureSetup {
  MelParamSet mel;
  PitchFusionConfig fusion;
  PitchRange pitch_range;
  TemplateConfig templ;
};

struct Conditioning {
  PitchCurve pitch;
  MelSpectrogram mel;
  SpeechTemplate templ;
};

/// Fused pitch on the mel frame grid, log-mel, and the speech template
/// built from both. noise_seed overrides setup.templ.rng_seed.
Conditioning extract_conditioning(const Waveform& wave, const FeatureSetup& setup,
                                  std::uint64_t noise_seed);

struct TrainBatch {
  nn::Tensor templates;  // [B, 1, T]
  nn::Tensor mels;       // [B, n_mels, T / hop + 1]
  nn::Tensor targets;    // [B, 1, T]
  int sample_rate = 0;

  std::size_t size() const { return targets.empty() ? 0 : targets.dim(0); }
};

// Stacks equal-length items; throws on inconsistent shapes.
TrainBatch make_batch(const std::vector<Waveform>& targets, const std::vector<Conditioning>& conds);

struct LossSetup {
  LossWeights weights;
  MelLossConfig mel;
  EnvelopeConfig envelope;
};

// Generator, discriminators, one Adam per side, step counter and the data
// RNG. Owns its parameters exclusively; not copyable.
class ModelState {
 public:
  ModelState(const GeneratorConfig& gen, const DiscriminatorConfig& disc, const nn::AdamConfig& adam,
             std::uint64_t seed);
  ModelState(const ModelState&) = delete;
  ModelState& operator=(const ModelState&) = delete;

  std::uint64_t seed;

 private:
  Rng init_rng_;

 public:
  Generator generator;
  Discriminators discriminators;
  nn::Adam opt_g;
  nn::Adam opt_d;
  std::int64_t step = 0;
  Rng rng;
};

/// Discriminator update on the detached generator output, then generator
/// update against the refreshed discriminators. Metrics: step, loss_total,
/// loss_mel (lambda-weighted), loss_mel_raw, loss_env, loss_adv_g, loss_d,
/// loss_mpd, loss_mrd. Throws kNumerical on a non-finite loss.
Metrics train_step(ModelState& state, const TrainBatch& batch, const LossSetup& losses);

// Discriminator loss of the current state on a batch, without updates.
double evaluate_discriminator_loss(const ModelState& state, const TrainBatch& batch);

// Random augmented slices of the sources with their conditioning; draws
// from state.rng.
TrainBatch sample_batch(ModelState& state, const std::vector<Waveform>& sources, std::size_t batch_size,
                        std::size_t n_slice, const ShiftRange& shift, const LoudnessRange& loudness,
                        const FeatureSetup& features);

}  // namespace pulsevoc
