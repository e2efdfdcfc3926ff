// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pulsevoc/augment.h"
#include "pulsevoc/losses.h"
#include "pulsevoc/model.h"
#include "pulsevoc/nn/optim.h"
#include "pulsevoc/pitch.h"
#include "pulsevoc/speech_template.h"
#include "pulsevoc/train.h"

namespace pulsevoc {

struct TrainingConfig {
  int batch_size = 16;
  int steps = 1000;
  std::optional<std::uint64_t> seed;
  double lr = 2e-4;
  double beta1 = 0.8;
  double beta2 = 0.99;
  int segment_samples = 16384;
  int checkpoint_every = 100;

  void validate() const;
};

// Every tunable of the pipeline. Section and key names of the text format
// follow the member names.
struct RunConfig {
  int sample_rate = 44100;
  MelParamSet mel;
  PitchFusionConfig fusion;
  PitchRange pitch_range;
  TemplateConfig templ;
  ShiftRange shift;
  LoudnessRange loudness;
  MelLossConfig mel_loss = MelLossConfig::full_band();
  EnvelopeConfig envelope;
  LossWeights loss;
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  TrainingConfig training;

  // Throws kInvalidArgument with a "section.key" path on the first failure.
  void validate() const;

  FeatureSetup features() const;
  LossSetup losses() const;
  nn::AdamConfig adam() const;

  static RunConfig full_band();
  // 8 kHz, base_channels 4, hop 4, 8 mel bins.
  static RunConfig toy();
};

// "default" or "toy".
RunConfig preset(const std::string& name);

/// Applies a TOML subset (sections, key = value, numbers, booleans, strings,
/// nested arrays, # comments) onto base. Unknown sections or keys, type
/// errors and duplicate keys throw kInvalidArgument naming "section.key".
/// The result is not validated.
RunConfig parse_config(const std::string& text, const RunConfig& base);
RunConfig load_config(const std::string& path, const RunConfig& base);

// "section.key=value" with a TOML value.
void apply_override(RunConfig& cfg, const std::string& assignment);

// Canonical text; parse_config(to_toml(c), any) reproduces c.
std::string to_toml(const RunConfig& cfg);

}  // namespace pulsevoc
