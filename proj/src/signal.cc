// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pulsevoc/signal.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.h"
#include "pulsevoc/error.h"

namespace pulsevoc {

Waveform::Waveform(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (sample_rate_ <= 0) {
    throw_invalid(fmt::format("sample rate must be positive, got {}", sample_rate_));
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw_invalid(fmt::format("non-finite sample at index {}", i));
    }
  }
}

void MelParamSet::validate_stft() const {
  if (fft_size <= 0) throw_invalid(fmt::format("fft_size must be positive, got {}", fft_size));
  if (win_size <= 0 || win_size > fft_size) {
    throw_invalid(fmt::format("win_size must be in (0, fft_size={}], got {}", fft_size, win_size));
  }
  if (hop_size <= 0 || hop_size > win_size) {
    throw_invalid(fmt::format("hop_size must be in (0, win_size={}], got {}", win_size, hop_size));
  }
}

void MelParamSet::validate(int sample_rate) const {
  validate_stft();
  if (n_mels < 1) throw_invalid(fmt::format("n_mels must be >= 1, got {}", n_mels));
  if (!(f_min > 0.0) || !(f_min < f_max) || f_max > sample_rate / 2.0) {
    throw_invalid(fmt::format("mel range must satisfy 0 < f_min < f_max <= {}, got [{}, {}]",
                              sample_rate / 2.0, f_min, f_max));
  }
}

std::size_t reflect_index(long long i, std::size_t n) {
  if (n == 1) return 0;
  const long long period = 2 * static_cast<long long>(n - 1);
  long long m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < static_cast<long long>(n) ? m : period - m);
}

Spectrogram stft_magnitude(const Waveform& wave, const MelParamSet& params) {
  if (wave.empty()) throw_invalid("stft_magnitude: empty waveform");
  params.validate_stft();
  detail::StftKernel kernel(params.fft_size, params.hop_size, params.win_size);
  const auto spec = kernel.forward(wave.view());
  const std::size_t frames = kernel.n_frames(wave.size());
  const int bins = kernel.n_bins();
  Spectrogram out{Matrix(bins, frames), params};
  for (std::size_t t = 0; t < frames; ++t) {
    for (int k = 0; k < bins; ++k) out.magnitudes(k, t) = std::abs(spec[t * bins + k]);
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_filterbank(const MelParamSet& params, int sample_rate) {
  params.validate(sample_rate);
  const int bins = params.n_bins();
  const double lo = hz_to_mel(params.f_min);
  const double hi = hz_to_mel(params.f_max);
  std::vector<double> edges(params.n_mels + 2);
  for (int i = 0; i < params.n_mels + 2; ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * i / (params.n_mels + 1));
  }
  Matrix fb(params.n_mels, bins);
  for (int m = 0; m < params.n_mels; ++m) {
    bool nonzero = false;
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / params.fft_size;
      const double rise = (f - edges[m]) / (edges[m + 1] - edges[m]);
      const double fall = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
      const double w = std::max(0.0, std::min(rise, fall));
      fb(m, k) = w;
      nonzero = nonzero || w > 0.0;
    }
    if (!nonzero) {
      throw_invalid(fmt::format(
          "mel filter {} of {} has no FFT bin (fft_size {} too small for n_mels)", m,
          params.n_mels, params.fft_size));
    }
  }
  return fb;
}

MelSpectrogram mel_spectrogram(const Waveform& wave, const MelParamSet& params,
                               double log_floor) {
  const Matrix fb = mel_filterbank(params, wave.sample_rate());
  const Spectrogram spec = stft_magnitude(wave, params);
  const std::size_t frames = spec.n_frames();
  MelSpectrogram out{Matrix(params.n_mels, frames), params};
  for (int m = 0; m < params.n_mels; ++m) {
    const auto w = fb.row(m);
    for (std::size_t t = 0; t < frames; ++t) {
      double acc = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        if (w[k] != 0.0) acc += w[k] * spec.magnitudes(k, t);
      }
      out.log_mels(m, t) = std::log(std::max(acc, log_floor));
    }
  }
  return out;
}

FrameCurve zero_crossing_rate(const Waveform& wave, int win_size, int hop_size) {
  if (wave.empty()) throw_invalid("zero_crossing_rate: empty waveform");
  if (win_size <= 0 || hop_size <= 0) {
    throw_invalid(fmt::format("zero_crossing_rate: win {} and hop {} must be positive",
                              win_size, hop_size));
  }
  const std::size_t n = wave.size();
  const long long half = win_size / 2;
  const std::size_t frames = n / hop_size + 1;
  const long long first = -half;
  const long long last = static_cast<long long>(frames - 1) * hop_size - half + win_size;
  const std::size_t len = static_cast<std::size_t>(last - first);

  // Sign of the padded signal; zeros inherit the previous sign, leading
  // zeros take the first nonzero sign.
  std::vector<signed char> sign(len, 0);
  signed char prev = 0;
  for (std::size_t i = 0; i < len && prev == 0; ++i) {
    const double v = wave[reflect_index(first + static_cast<long long>(i), n)];
    if (v != 0.0) prev = v > 0.0 ? 1 : -1;
  }
  if (prev == 0) prev = 1;
  for (std::size_t i = 0; i < len; ++i) {
    const double v = wave[reflect_index(first + static_cast<long long>(i), n)];
    if (v > 0.0) prev = 1;
    else if (v < 0.0) prev = -1;
    sign[i] = prev;
  }
  // crossings[i] = number of sign changes among pairs (j, j+1), j < i.
  std::vector<int> crossings(len, 0);
  for (std::size_t i = 1; i < len; ++i) {
    crossings[i] = crossings[i - 1] + (sign[i] != sign[i - 1] ? 1 : 0);
  }
  FrameCurve out{std::vector<double>(frames), hop_size, win_size};
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t a = t * hop_size;  // offset of window start in padded signal
    const int count = crossings[a + win_size - 1] - crossings[a];
    out.values[t] = static_cast<double>(count) / win_size;
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw_invalid(fmt::format("gaussian sigma must be > 0, got {}", sigma));
  const int radius = static_cast<int>(std::floor(std::sqrt(std::log(1e6) / sigma)));
  const double scale = std::sqrt(sigma / std::numbers::pi);
  std::vector<double> kernel(2 * radius + 1);
  for (int x = -radius; x <= radius; ++x) {
    kernel[x + radius] = scale * std::exp(-sigma * x * x);
  }
  return kernel;
}

FrameCurve gaussian_smooth(const FrameCurve& curve, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const long long radius = static_cast<long long>(kernel.size() / 2);
  const long long n = static_cast<long long>(curve.size());
  FrameCurve out = curve;
  for (long long t = 0; t < n; ++t) {
    double acc = 0.0;
    for (long long j = -radius; j <= radius; ++j) {
      const long long idx = std::clamp(t + j, 0LL, n - 1);
      acc += kernel[j + radius] * curve.values[idx];
    }
    out.values[t] = acc;
  }
  return out;
}

FrameCurve discrete_derivative(const FrameCurve& curve) {
  const std::size_t n = curve.size();
  if (n < 2) throw_invalid(fmt::format("discrete_derivative needs >= 2 frames, got {}", n));
  FrameCurve out = curve;
  for (std::size_t t = 0; t + 1 < n; ++t) out.values[t] = curve.values[t + 1] - curve.values[t];
  out.values[n - 1] = out.values[n - 2];
  return out;
}

FrameCurve envelope(const Waveform& wave, int win_size, int hop_size) {
  if (wave.empty()) throw_invalid("envelope: empty waveform");
  if (win_size <= 0 || hop_size <= 0) {
    throw_invalid(fmt::format("envelope: win {} and hop {} must be positive", win_size, hop_size));
  }
  const std::size_t n = wave.size();
  const std::size_t frames = (n + hop_size - 1) / hop_size;
  FrameCurve out{std::vector<double>(frames), hop_size, win_size};
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t a = t * hop_size;
    const std::size_t b = std::min(n, a + win_size);
    out.values[t] = *std::max_element(wave.samples().begin() + a, wave.samples().begin() + b);
  }
  return out;
}

namespace {

constexpr int kZeroCrossings = 64;
constexpr int kTableDensity = 512;
constexpr double kKaiserBeta = 14.77;
// Passband fraction of the band limit; places the stopband edge near Nyquist.
constexpr double kRolloff = 0.9475937;

// sinc(v) * kaiser(v / kZeroCrossings) for v in [0, kZeroCrossings].
const std::vector<double>& interp_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kZeroCrossings * kTableDensity + 2, 0.0);
    const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
    for (int i = 0; i <= kZeroCrossings * kTableDensity; ++i) {
      const double v = static_cast<double>(i) / kTableDensity;
      const double r = v / kZeroCrossings;
      const double win = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
      const double sinc = i == 0 ? 1.0 : std::sin(std::numbers::pi * v) / (std::numbers::pi * v);
      t[i] = sinc * win;
    }
    return t;
  }();
  return table;
}

}  // namespace

std::vector<double> resample_ratio(std::span<const double> x, double ratio) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw_invalid(fmt::format("resample ratio must be positive, got {}", ratio));
  }
  const std::size_t n = x.size();
  const auto out_len = static_cast<std::size_t>(std::llround(n * ratio));
  if (ratio == 1.0) return {x.begin(), x.end()};
  const auto& table = interp_table();
  const double scale = std::min(1.0, ratio) * kRolloff;
  const double reach = kZeroCrossings / scale;  // support half-width, input samples
  std::vector<double> y(out_len, 0.0);
  for (std::size_t m = 0; m < out_len; ++m) {
    const double t = m / ratio;
    const long long lo = std::max(0LL, static_cast<long long>(std::ceil(t - reach)));
    const long long hi = std::min(static_cast<long long>(n) - 1,
                                  static_cast<long long>(std::floor(t + reach)));
    double acc = 0.0;
    for (long long k = lo; k <= hi; ++k) {
      const double pos = std::abs(t - k) * scale * kTableDensity;
      const auto idx = static_cast<std::size_t>(pos);
      if (idx >= static_cast<std::size_t>(kZeroCrossings * kTableDensity)) continue;
      const double frac = pos - idx;
      acc += x[k] * (table[idx] + frac * (table[idx + 1] - table[idx]));
    }
    y[m] = acc * scale;
  }
  return y;
}

Waveform kaiser_resample(const Waveform& wave, int target_rate) {
  if (target_rate <= 0) throw_invalid(fmt::format("target rate must be positive, got {}", target_rate));
  if (target_rate == wave.sample_rate()) return wave;
  const double ratio = static_cast<double>(target_rate) / wave.sample_rate();
  return Waveform(resample_ratio(wave.view(), ratio), target_rate);
}

double peak(const Waveform& wave) {
  if (wave.empty()) throw_invalid("peak of an empty waveform");
  double p = 0.0;
  for (double v : wave.samples()) p = std::max(p, std::abs(v));
  return p;
}

Waveform apply_gain(const Waveform& wave, double gain) {
  if (!std::isfinite(gain)) throw_invalid("apply_gain: gain must be finite");
  std::vector<double> out(wave.samples());
  for (double& v : out) v *= gain;
  return Waveform(std::move(out), wave.sample_rate());
}

}  // namespace pulsevoc
