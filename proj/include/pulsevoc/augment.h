// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include "pulsevoc/rng.h"
#include "pulsevoc/types.h"

namespace pulsevoc {

// Integer semitone bounds for random pitch shifts.
struct ShiftRange {
  int zeta_min = -12;
  int zeta_max = 12;

  void validate() const;
};

// Peak bounds and relative gain bounds for loudness augmentation.
struct LoudnessRange {
  double p_min = 0.1;
  double p_max = 1.0;
  double r_min = 0.5;
  double r_max = 2.0;

  void validate() const;
};

struct AugmentedSlice {
  Waveform wave;
  int zeta = 0;
  double gain = 1.0;
  std::size_t source_id = 0;
  std::size_t source_offset = 0;
};

// Extra source samples taken beyond the exact shift-scaled length.
inline constexpr std::size_t kResampleMargin = 64;

int sample_shift(Rng& rng, const ShiftRange& range);

/// Shifts pitch by zeta semitones by resampling to r * 2^(-zeta/12) and
/// keeping the original rate label. Duration scales by 2^(-zeta/12).
Waveform pitch_shift(const Waveform& wave, int zeta);

/// ceil(n_slice * 2^(zeta/12)) + kResampleMargin.
std::size_t required_source_length(std::size_t n_slice, int zeta);

// Interval [max(p_min, r_min p), min(p_max, r_max p)] for a source peak p;
// an empty interval collapses onto the bound nearest the source peak.
std::pair<double, double> loudness_bounds(double source_peak, const LoudnessRange& range);

/// Draws a target peak p' uniformly (linear scale) from loudness_bounds and
/// rescales the wave to it. Returns the wave and the applied gain p'/p.
std::pair<Waveform, double> loudness_augment(const Waveform& wave, const LoudnessRange& range,
                                             Rng& rng);

/// Random slice with random pitch shift and loudness, exactly n_slice long.
AugmentedSlice make_training_item(const Waveform& source, std::size_t n_slice,
                                  const ShiftRange& shift_range, const LoudnessRange& loud_range,
                                  Rng& rng, std::size_t source_id = 0);

}  // namespace pulsevoc
