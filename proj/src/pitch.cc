// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pulsevoc/pitch.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fft.h"
#include "pulsevoc/error.h"
#include "pulsevoc/signal.h"

namespace pulsevoc {

void PitchRange::validate(int sample_rate) const {
  if (!(f_floor > 0.0) || !(f_floor < f_ceil) || !(f_ceil < sample_rate / 2.0)) {
    throw_invalid(fmt::format("pitch range must satisfy 0 < f_floor < f_ceil < {}, got [{}, {}]",
                              sample_rate / 2.0, f_floor, f_ceil));
  }
}

void PitchFusionConfig::validate() const {
  if (!(sigma > 0.0)) throw_invalid(fmt::format("pitch.sigma must be > 0, got {}", sigma));
  if (!(gamma > 0.0)) throw_invalid(fmt::format("pitch.gamma must be > 0, got {}", gamma));
  if (zcr_win <= 0 || zcr_hop <= 0) {
    throw_invalid(fmt::format("pitch.zcr_win/zcr_hop must be positive, got {}/{}", zcr_win, zcr_hop));
  }
}

namespace {

struct TrackerOptions {
  double voicing_threshold;
  bool refine;
};

// Normalized cross-correlation between the N samples before the frame
// center and the same span shifted by each lag up to N.
PitchCurve nccf_track(const Waveform& wave, int hop_size, const PitchRange& range,
                      const TrackerOptions& opts) {
  if (hop_size <= 0) throw_invalid(fmt::format("pitch hop must be positive, got {}", hop_size));
  const int sr = wave.sample_rate();
  range.validate(sr);
  const int max_lag = static_cast<int>(std::ceil(sr / range.f_floor));
  const int min_lag = std::max(2, static_cast<int>(std::floor(sr / range.f_ceil)));
  const std::size_t needed = 2 * static_cast<std::size_t>(max_lag);
  if (wave.size() < needed) {
    throw_invalid(fmt::format("pitch estimation needs at least {} samples (2 * sr / f_floor), got {}",
                              needed, wave.size()));
  }
  const int seg = max_lag;
  int fft_size = 1;
  while (fft_size < 3 * seg + 1) fft_size *= 2;
  const auto& fft = detail::real_fft(fft_size);
  const int bins = fft_size / 2 + 1;
  // The silence gate looks at the frame itself, not the lag span, so frames
  // just past a voiced segment do not inherit its energy.
  const int rms_half = std::max(hop_size, sr / 200) / 2 + 1;

  const auto& x = wave.samples();
  const long long n = static_cast<long long>(x.size());
  auto at = [&](long long i) { return (i >= 0 && i < n) ? x[i] : 0.0; };

  const std::size_t frames = wave.size() / hop_size + 1;
  PitchCurve out{std::vector<double>(frames, 0.0), hop_size, sr};
  std::vector<double> a(fft_size), b(fft_size), corr(fft_size);
  std::vector<detail::Complex> fa(bins), fb(bins);
  std::vector<double> energy_b(2 * seg + 1);
  std::vector<double> nccf(max_lag + 2, 0.0);

  for (std::size_t t = 0; t < frames; ++t) {
    const long long c = static_cast<long long>(t) * hop_size;
    double sq = 0.0;
    long long count = 0;
    for (long long i = std::max(0LL, c - rms_half); i < std::min(n, c + rms_half); ++i, ++count) {
      sq += x[i] * x[i];
    }
    if (count == 0 || std::sqrt(sq / count) < kRmsGate) continue;

    std::fill(a.begin(), a.end(), 0.0);
    std::fill(b.begin(), b.end(), 0.0);
    double energy_a = 0.0;
    for (int j = 0; j < seg; ++j) {
      a[j] = at(c - seg + j);
      energy_a += a[j] * a[j];
    }
    for (int j = 0; j < 2 * seg; ++j) b[j] = at(c - seg + j);
    if (energy_a <= 0.0) continue;
    energy_b[0] = 0.0;
    for (int j = 0; j < 2 * seg; ++j) energy_b[j + 1] = energy_b[j] + b[j] * b[j];

    fft.forward(a.data(), fa.data());
    fft.forward(b.data(), fb.data());
    for (int k = 0; k < bins; ++k) fa[k] = std::conj(fa[k]) * fb[k];
    fft.inverse(fa.data(), corr.data());

    const int lo = min_lag - 1;
    const int hi = std::min(max_lag + 1, seg);
    for (int lag = lo; lag <= hi; ++lag) {
      const double eb = energy_b[lag + seg] - energy_b[lag];
      const double denom = std::sqrt(energy_a * std::max(eb, 0.0));
      nccf[lag] = denom > 1e-12 ? corr[lag] / fft_size / denom : 0.0;
    }
    // Smallest-lag local maximum close to the global best avoids
    // picking period multiples.
    double best = 0.0;
    for (int lag = lo + 1; lag < hi; ++lag) {
      if (nccf[lag] >= nccf[lag - 1] && nccf[lag] > nccf[lag + 1]) best = std::max(best, nccf[lag]);
    }
    if (best < opts.voicing_threshold) continue;
    int chosen = -1;
    for (int lag = lo + 1; lag < hi; ++lag) {
      if (nccf[lag] >= nccf[lag - 1] && nccf[lag] > nccf[lag + 1] && nccf[lag] >= 0.9 * best) {
        chosen = lag;
        break;
      }
    }
    if (chosen < 0) continue;
    double period = chosen;
    if (opts.refine) {
      const double l = nccf[chosen - 1], m = nccf[chosen], r = nccf[chosen + 1];
      const double curvature = l - 2.0 * m + r;
      if (curvature < 0.0) period += 0.5 * (l - r) / curvature;
    }
    const double f0 = sr / period;
    if (f0 >= range.f_floor && f0 <= range.f_ceil) out.f0[t] = f0;
  }
  return out;
}

}  // namespace

PitchCurve estimate_base_coarse(const Waveform& wave, int hop_size, const PitchRange& range) {
  return nccf_track(wave, hop_size, range, {kCoarseVoicing, false});
}

PitchCurve estimate_base_fine(const Waveform& wave, int hop_size, const PitchRange& range) {
  return nccf_track(wave, hop_size, range, {kFineVoicing, true});
}

FrameCurve zcr_trend(const Waveform& wave, const PitchFusionConfig& cfg) {
  cfg.validate();
  const FrameCurve zcr = zero_crossing_rate(wave, cfg.zcr_win, cfg.zcr_hop);
  return gaussian_smooth(discrete_derivative(zcr), cfg.sigma);
}

PitchCurve fuse_pitch(const PitchCurve& fine, const PitchCurve& coarse, const FrameCurve& trend,
                      double gamma) {
  if (fine.size() != coarse.size() || fine.hop_size != coarse.hop_size) {
    throw_invalid(fmt::format("fuse_pitch: fine ({} frames, hop {}) and coarse ({} frames, hop {}) differ",
                              fine.size(), fine.hop_size, coarse.size(), coarse.hop_size));
  }
  if (trend.size() == 0) throw_invalid("fuse_pitch: empty ZCR trend");
  PitchCurve out = fine;
  const long long last = static_cast<long long>(trend.size()) - 1;
  for (std::size_t t = 0; t < fine.size(); ++t) {
    const double pos = static_cast<double>(t) * fine.hop_size / trend.hop_size;
    const long long idx = std::clamp(static_cast<long long>(std::llround(pos)), 0LL, last);
    if (trend.values[idx] > gamma && coarse.f0[t] == 0.0) out.f0[t] = 0.0;
  }
  return out;
}

PitchCurve fuse_pitch(const PitchCurve& fine, const PitchCurve& coarse, const Waveform& wave,
                      const PitchFusionConfig& cfg) {
  return fuse_pitch(fine, coarse, zcr_trend(wave, cfg), cfg.gamma);
}

std::vector<bool> voiced_mask(const PitchCurve& curve) {
  std::vector<bool> mask(curve.size());
  for (std::size_t t = 0; t < curve.size(); ++t) mask[t] = curve.f0[t] > 0.0;
  return mask;
}

PitchCurve track_pitch(const Waveform& wave, int hop_size, const PitchFusionConfig& cfg,
                       const PitchRange& range) {
  cfg.validate();
  const PitchCurve fine = estimate_base_fine(wave, hop_size, range);
  const PitchCurve coarse = estimate_base_coarse(wave, hop_size, range);
  return fuse_pitch(fine, coarse, wave, cfg);
}

void write_pitch(std::ostream& out, const PitchCurve& curve) {
  out << fmt::format("# hop={} sr={}\n", curve.hop_size, curve.sample_rate);
  for (std::size_t t = 0; t < curve.size(); ++t) out << fmt::format("{} {}\n", t, curve.f0[t]);
}

void write_pitch(const std::string& path, const PitchCurve& curve) {
  std::ofstream out(path);
  if (!out) throw_io(fmt::format("cannot write '{}'", path));
  write_pitch(out, curve);
  if (!out) throw_io(fmt::format("failed writing '{}'", path));
}

PitchCurve read_pitch(std::istream& in) {
  PitchCurve curve;
  std::string line;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "# hop=%d sr=%d", &curve.hop_size, &curve.sample_rate) != 2) {
    throw_io("pitch file: missing '# hop=<n> sr=<n>' header");
  }
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::size_t index = 0;
    double f0 = 0.0;
    if (!(row >> index >> f0) || index != expected) {
      throw_io(fmt::format("pitch file: malformed row '{}'", line));
    }
    curve.f0.push_back(f0);
    ++expected;
  }
  return curve;
}

PitchCurve read_pitch(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io(fmt::format("cannot open '{}'", path));
  return read_pitch(in);
}

}  // namespace pulsevoc
