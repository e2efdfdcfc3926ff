// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "fft.h"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "pulsevoc/signal.h"

namespace pulsevoc::detail {

namespace {
// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(int n) : n_(n) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  std::vector<double> in(n);
  std::vector<Complex> out(n / 2 + 1);
  auto* cout = reinterpret_cast<fftw_complex*>(out.data());
  forward_plan_ = fftw_plan_dft_r2c_1d(n, in.data(), cout,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
  inverse_plan_ = fftw_plan_dft_c2r_1d(n, cout, in.data(),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void RealFft::forward(const double* in, Complex* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_),
                       const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void RealFft::inverse(const Complex* in, double* out) const {
  // c2r overwrites its input.
  std::vector<Complex> scratch(in, in + n_ / 2 + 1);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(scratch.data()), out);
}

const RealFft& real_fft(int n) {
  static std::mutex cache_mutex;
  static std::map<int, std::unique_ptr<RealFft>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

StftKernel::StftKernel(int fft_size, int hop_size, int win_size)
    : fft_size_(fft_size),
      hop_size_(hop_size),
      win_size_(win_size),
      window_(fft_size, 0.0) {
  const int offset = (fft_size - win_size) / 2;
  for (int i = 0; i < win_size; ++i) {
    window_[offset + i] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / win_size);
  }
}

std::vector<Complex> StftKernel::forward(std::span<const double> x) const {
  const std::size_t n = x.size();
  const std::size_t frames = n_frames(n);
  const int bins = n_bins();
  const long long half = fft_size_ / 2;
  const RealFft& fft = real_fft(fft_size_);
  std::vector<Complex> spec(frames * bins);
  std::vector<double> frame(fft_size_);
  for (std::size_t t = 0; t < frames; ++t) {
    const long long start = static_cast<long long>(t) * hop_size_ - half;
    for (int j = 0; j < fft_size_; ++j) {
      frame[j] = window_[j] == 0.0
                     ? 0.0
                     : window_[j] * x[reflect_index(start + j, n)];
    }
    fft.forward(frame.data(), spec.data() + t * bins);
  }
  return spec;
}

void StftKernel::backward_magnitude(std::span<const double> grad_mag,
                                    std::span<const Complex> spec,
                                    std::span<double> grad_x) const {
  const std::size_t n = grad_x.size();
  const std::size_t frames = n_frames(n);
  const int bins = n_bins();
  const bool has_nyquist = fft_size_ % 2 == 0;
  const long long half = fft_size_ / 2;
  const RealFft& fft = real_fft(fft_size_);
  std::vector<Complex> z(bins);
  std::vector<double> frame_grad(fft_size_);
  for (std::size_t t = 0; t < frames; ++t) {
    bool any = false;
    for (int k = 0; k < bins; ++k) {
      const Complex x = spec[t * bins + k];
      const double mag = std::abs(x);
      const double g = grad_mag[t * bins + k];
      if (mag == 0.0 || g == 0.0) {
        z[k] = 0.0;
        continue;
      }
      any = true;
      const bool edge = k == 0 || (has_nyquist && k == bins - 1);
      z[k] = (edge ? g : 0.5 * g) * x / mag;
    }
    if (!any) continue;
    fft.inverse(z.data(), frame_grad.data());
    const long long start = static_cast<long long>(t) * hop_size_ - half;
    for (int j = 0; j < fft_size_; ++j) {
      if (window_[j] == 0.0) continue;
      grad_x[reflect_index(start + j, n)] += window_[j] * frame_grad[j];
    }
  }
}

}  // namespace pulsevoc::detail
