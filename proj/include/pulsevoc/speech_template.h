// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <vector>

#include "pulsevoc/pitch.h"
#include "pulsevoc/types.h"

namespace pulsevoc {

struct TemplateConfig {
  double noise_amp = 0.1;
  // Samples per pulse; 1 gives single-sample impulses.
  int pulse_width = 1;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Excitation signal the generator refines: pulses at the pitch period in
// voiced frames, uniform noise in unvoiced frames.
struct SpeechTemplate {
  std::vector<double> samples;
  int sample_rate = 44100;
  std::vector<std::size_t> pulse_positions;

  Waveform to_waveform() const { return Waveform(samples, sample_rate); }
};

/// Per-frame Frobenius norm of the linear mel column, normalized to the
/// utterance maximum. Entries at the log floor count as zero.
FrameCurve frame_intensity(const MelSpectrogram& mel, double log_floor = 1e-5);

/// Phase-accumulator pulse placement. A voiced sample adds f0 / sample_rate
/// to the phase and emits a pulse of the frame intensity when the phase
/// reaches 1; the first voiced sample after unvoiced (or signal start)
/// always emits. Sample s belongs to frame round(s / hop).
SpeechTemplate build_template(const PitchCurve& pitch, const FrameCurve& intensity,
                              std::size_t n_samples, int sample_rate,
                              const TemplateConfig& cfg);

}  // namespace pulsevoc
