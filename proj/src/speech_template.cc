// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pulsevoc/speech_template.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "pulsevoc/error.h"
#include "pulsevoc/rng.h"

namespace pulsevoc {

void TemplateConfig::validate() const {
  if (!(noise_amp > 0.0)) throw_invalid(fmt::format("template.noise_amp must be > 0, got {}", noise_amp));
  if (pulse_width < 1) throw_invalid(fmt::format("template.pulse_width must be >= 1, got {}", pulse_width));
}

FrameCurve frame_intensity(const MelSpectrogram& mel, double log_floor) {
  const std::size_t frames = mel.n_frames();
  FrameCurve out{std::vector<double>(frames, 0.0), mel.params.hop_size, mel.params.win_size};
  const double floor_cut = log_floor * (1.0 + 1e-9);
  double top = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    double sq = 0.0;
    for (std::size_t m = 0; m < mel.n_mels(); ++m) {
      const double v = std::exp(mel.log_mels(m, t));
      if (v > floor_cut) sq += v * v;
    }
    out.values[t] = std::sqrt(sq);
    top = std::max(top, out.values[t]);
  }
  if (top > 0.0) {
    for (double& v : out.values) v /= top;
  }
  return out;
}

SpeechTemplate build_template(const PitchCurve& pitch, const FrameCurve& intensity,
                              std::size_t n_samples, int sample_rate, const TemplateConfig& cfg) {
  cfg.validate();
  if (n_samples == 0) throw_invalid("build_template: n_samples must be positive");
  if (sample_rate <= 0) throw_invalid("build_template: sample rate must be positive");
  if (pitch.size() == 0 || pitch.size() != intensity.size() ||
      pitch.hop_size != intensity.hop_size) {
    throw_invalid(fmt::format(
        "build_template: pitch ({} frames, hop {}) and intensity ({} frames, hop {}) grids differ",
        pitch.size(), pitch.hop_size, intensity.size(), intensity.hop_size));
  }
  for (double f : pitch.f0) {
    if (f < 0.0 || !std::isfinite(f)) throw_invalid(fmt::format("build_template: invalid f0 {}", f));
  }
  const std::size_t hop = static_cast<std::size_t>(pitch.hop_size);
  const std::size_t last_frame = pitch.size() - 1;

  SpeechTemplate out{std::vector<double>(n_samples, 0.0), sample_rate, {}};
  Rng rng(cfg.rng_seed);
  double phase = 0.0;
  bool was_voiced = false;
  int pulse_left = 0;
  double pulse_value = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const std::size_t frame = std::min((s + hop / 2) / hop, last_frame);
    const double f0 = pitch.f0[frame];
    const double level = intensity.values[frame];
    if (f0 <= 0.0) {
      out.samples[s] = cfg.noise_amp * level * (2.0 * uniform01(rng) - 1.0);
      was_voiced = false;
      pulse_left = 0;
      continue;
    }
    if (was_voiced) {
      phase += f0 / sample_rate;
    } else {
      phase = 1.0;
      was_voiced = true;
    }
    // Tolerance absorbs round-off in the accumulated increments.
    if (phase >= 1.0 - 1e-9) {
      phase -= 1.0;
      out.pulse_positions.push_back(s);
      pulse_left = cfg.pulse_width;
      pulse_value = level;
    }
    if (pulse_left > 0) {
      out.samples[s] = pulse_value;
      --pulse_left;
    }
  }
  return out;
}

}  // namespace pulsevoc
