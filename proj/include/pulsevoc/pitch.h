// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pulsevoc/types.h"

namespace pulsevoc {

// Frame-rate F0 in Hz, 0 marks an unvoiced frame. Frame t is centered on
// sample t * hop_size, matching the mel frame grid.
struct PitchCurve {
  std::vector<double> f0;
  int hop_size = 256;
  int sample_rate = 44100;

  std::size_t size() const { return f0.size(); }
  friend bool operator==(const PitchCurve&, const PitchCurve&) = default;
};

struct PitchRange {
  double f_floor = 40.0;
  double f_ceil = 1600.0;

  void validate(int sample_rate) const;
};

struct PitchFusionConfig {
  double sigma = 4.0;
  double gamma = 0.002;
  int zcr_win = 512;
  int zcr_hop = 256;

  void validate() const;
};

// Voicing thresholds on the normalized autocorrelation peak.
inline constexpr double kCoarseVoicing = 0.5;
inline constexpr double kFineVoicing = 0.3;
// Frames whose RMS over a centered max(hop, 5 ms) span is below this are
// unvoiced.
inline constexpr double kRmsGate = 1e-3;

/// Integer-lag normalized autocorrelation tracker with a strict voicing
/// gate. Fills the role of the conservative estimator in the fusion rule.
PitchCurve estimate_base_coarse(const Waveform& wave, int hop_size,
                                const PitchRange& range = {});

/// Same tracker with parabolic peak refinement and a permissive gate.
PitchCurve estimate_base_fine(const Waveform& wave, int hop_size,
                              const PitchRange& range = {});

/// The smoothed ZCR derivative g * dr/dt, one value per ZCR frame.
FrameCurve zcr_trend(const Waveform& wave, const PitchFusionConfig& cfg);

/// Fusion rule. With d the ZCR trend aligned to the pitch grid by nearest
/// frame: d <= gamma keeps fine; d > gamma keeps fine where coarse is voiced
/// and is 0 where coarse is unvoiced.
PitchCurve fuse_pitch(const PitchCurve& fine, const PitchCurve& coarse,
                      const Waveform& wave, const PitchFusionConfig& cfg);

// Same rule against a precomputed trend curve.
PitchCurve fuse_pitch(const PitchCurve& fine, const PitchCurve& coarse,
                      const FrameCurve& trend, double gamma);

std::vector<bool> voiced_mask(const PitchCurve& curve);

// Both base estimators plus fusion.
PitchCurve track_pitch(const Waveform& wave, int hop_size,
                       const PitchFusionConfig& cfg = {},
                       const PitchRange& range = {});

// Two-column text: "# hop=<n> sr=<n>" then "frame_index f0_hz" per frame.
void write_pitch(std::ostream& out, const PitchCurve& curve);
void write_pitch(const std::string& path, const PitchCurve& curve);
PitchCurve read_pitch(std::istream& in);
PitchCurve read_pitch(const std::string& path);

}  // namespace pulsevoc
