// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <span>
#include <vector>

#include "pulsevoc/types.h"

namespace pulsevoc {

// Floor applied before the natural log in every log-mel computation.
inline constexpr double kLogFloor = 1e-5;

/// Hann-windowed magnitude STFT with reflect center padding. Frame t is
/// centered on sample t * hop_size; a window shorter than the FFT is
/// centered inside the FFT frame.
Spectrogram stft_magnitude(const Waveform& wave, const MelParamSet& params);

/// Triangular HTK-mel filterbank, shape [n_mels x n_bins]. Throws if any
/// filter row would be empty at this FFT resolution.
Matrix mel_filterbank(const MelParamSet& params, int sample_rate);

/// log(max(filterbank * |STFT|, floor)).
MelSpectrogram mel_spectrogram(const Waveform& wave, const MelParamSet& params,
                               double log_floor = kLogFloor);

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Fraction of sign changes per centered, reflect-padded window. Zero
/// samples carry the previous sign. One frame per hop, floor(n/hop)+1 frames.
FrameCurve zero_crossing_rate(const Waveform& wave, int win_size, int hop_size);

/// Samples of g(x) = sqrt(sigma/pi) exp(-sigma x^2) at integer offsets
/// -r..r, truncated where g drops below 1e-6 of its peak.
std::vector<double> gaussian_kernel(double sigma);

/// Convolution with gaussian_kernel(sigma), replicated edges.
FrameCurve gaussian_smooth(const FrameCurve& curve, double sigma);

/// Forward difference; the last frame repeats the previous difference.
FrameCurve discrete_derivative(const FrameCurve& curve);

/// Max over [t*hop, t*hop + win) for every t with t*hop < n.
FrameCurve envelope(const Waveform& wave, int win_size, int hop_size);

// Reflection-padding index for possibly far out-of-range positions.
std::size_t reflect_index(long long i, std::size_t n);

/// Band-limited resampling with a Kaiser-windowed sinc. Output length is
/// round(n * target / source).
Waveform kaiser_resample(const Waveform& wave, int target_rate);

// Same kernel, fractional ratio; the result keeps the input's rate label.
std::vector<double> resample_ratio(std::span<const double> x, double ratio);

double peak(const Waveform& wave);
Waveform apply_gain(const Waveform& wave, double gain);

}  // namespace pulsevoc
