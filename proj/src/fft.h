// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <span>
#include <vector>

namespace pulsevoc::detail {

using Complex = std::complex<double>;

// Real-input FFT of a fixed size backed by FFTW. Plans are cached per size
// and safe to execute concurrently.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }
  // n real samples -> n/2+1 bins.
  void forward(const double* in, Complex* out) const;
  // n/2+1 bins -> n real samples, unnormalized (sum over the full
  // Hermitian-extended spectrum).
  void inverse(const Complex* in, double* out) const;

 private:
  int n_;
  void* forward_plan_;
  void* inverse_plan_;
};

const RealFft& real_fft(int n);

// Hann-windowed center-padded STFT over one channel of samples.
class StftKernel {
 public:
  StftKernel(int fft_size, int hop_size, int win_size);

  int fft_size() const { return fft_size_; }
  int n_bins() const { return fft_size_ / 2 + 1; }
  std::size_t n_frames(std::size_t n) const { return n / hop_size_ + 1; }
  const std::vector<double>& window() const { return window_; }

  // Complex spectra, frame-major: spec[t * n_bins + k].
  std::vector<Complex> forward(std::span<const double> x) const;

  // Accumulates d(loss)/dx given d(loss)/d|X| (frame-major, same layout as
  // forward) and the spectra forward produced.
  void backward_magnitude(std::span<const double> grad_mag,
                          std::span<const Complex> spec,
                          std::span<double> grad_x) const;

 private:
  int fft_size_;
  int hop_size_;
  int win_size_;
  std::vector<double> window_;
};

}  // namespace pulsevoc::detail
