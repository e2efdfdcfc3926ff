// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pulsevoc/augment.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "pulsevoc/error.h"
#include "pulsevoc/signal.h"

namespace pulsevoc {

void ShiftRange::validate() const {
  if (zeta_min > 0 || zeta_max < 0) {
    throw_invalid(fmt::format("shift range must satisfy zeta_min <= 0 <= zeta_max, got [{}, {}]",
                              zeta_min, zeta_max));
  }
}

void LoudnessRange::validate() const {
  if (!(p_min > 0.0) || !(p_min <= p_max) || !(p_max <= 1.0)) {
    throw_invalid(fmt::format("loudness peaks must satisfy 0 < p_min <= p_max <= 1, got [{}, {}]",
                              p_min, p_max));
  }
  if (!(r_min > 0.0) || !(r_min <= r_max)) {
    throw_invalid(fmt::format("loudness rates must satisfy 0 < r_min <= r_max, got [{}, {}]",
                              r_min, r_max));
  }
}

int sample_shift(Rng& rng, const ShiftRange& range) {
  range.validate();
  return static_cast<int>(uniform_int(rng, range.zeta_min, range.zeta_max));
}

Waveform pitch_shift(const Waveform& wave, int zeta) {
  if (zeta == 0) return wave;
  const double ratio = std::exp2(-zeta / 12.0);
  return Waveform(resample_ratio(wave.view(), ratio), wave.sample_rate());
}

std::size_t required_source_length(std::size_t n_slice, int zeta) {
  if (n_slice == 0) throw_invalid("required_source_length: n_slice must be positive");
  const double exact = static_cast<double>(n_slice) * std::exp2(zeta / 12.0);
  // Guard against exact*(1+ulp) rounding up an integral product.
  const double rounded = std::round(exact);
  const double base = std::abs(exact - rounded) < 1e-9 ? rounded : std::ceil(exact);
  return static_cast<std::size_t>(base) + kResampleMargin;
}

std::pair<double, double> loudness_bounds(double source_peak, const LoudnessRange& range) {
  const double lo = std::max(range.p_min, range.r_min * source_peak);
  const double hi = std::min(range.p_max, range.r_max * source_peak);
  if (lo <= hi) return {lo, hi};
  const double nearest = std::abs(lo - source_peak) <= std::abs(hi - source_peak) ? lo : hi;
  return {nearest, nearest};
}

std::pair<Waveform, double> loudness_augment(const Waveform& wave, const LoudnessRange& range,
                                             Rng& rng) {
  range.validate();
  const double p = peak(wave);
  if (p == 0.0) throw_invalid("loudness_augment: silent input has no peak to rescale");
  const auto [lo, hi] = loudness_bounds(p, range);
  const double target = lo == hi ? lo : uniform(rng, lo, hi);
  const double gain = target / p;
  return {apply_gain(wave, gain), gain};
}

AugmentedSlice make_training_item(const Waveform& source, std::size_t n_slice,
                                  const ShiftRange& shift_range, const LoudnessRange& loud_range,
                                  Rng& rng, std::size_t source_id) {
  loud_range.validate();
  const int zeta = sample_shift(rng, shift_range);
  const std::size_t span = required_source_length(n_slice, zeta);
  if (source.size() < span) {
    throw_invalid(fmt::format("source {} has {} samples; a {}-sample slice at zeta={} needs {}",
                              source_id, source.size(), n_slice, zeta, span));
  }
  const auto offset = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long long>(source.size() - span)));
  std::vector<double> extract(source.samples().begin() + offset,
                              source.samples().begin() + offset + span);
  Waveform shifted = pitch_shift(Waveform(std::move(extract), source.sample_rate()), zeta);
  std::vector<double> sliced(shifted.samples().begin(), shifted.samples().begin() + n_slice);
  Waveform slice(std::move(sliced), source.sample_rate());

  AugmentedSlice item{slice, zeta, 1.0, source_id, offset};
  if (peak(slice) > 0.0) {
    auto [wave, gain] = loudness_augment(slice, loud_range, rng);
    item.wave = std::move(wave);
    item.gain = gain;
  }
  return item;
}

}  // namespace pulsevoc
