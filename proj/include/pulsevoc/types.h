// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pulsevoc {

// Mono signal. Samples are nominally in [-1, 1]; the constructor only
// enforces finiteness and a positive rate.
class Waveform {
 public:
  Waveform() = default;
  Waveform(std::vector<double> samples, int sample_rate);

  const std::vector<double>& samples() const { return samples_; }
  std::span<const double> view() const { return samples_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double operator[](std::size_t i) const { return samples_[i]; }
  double duration() const {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

 private:
  std::vector<double> samples_;
  int sample_rate_ = 1;
};

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// STFT and mel analysis parameters. The mel fields are ignored by plain
// STFT consumers.
struct MelParamSet {
  int fft_size = 2048;
  int win_size = 2048;
  int hop_size = 256;
  int n_mels = 128;
  double f_min = 20.0;
  double f_max = 22050.0;

  int n_bins() const { return fft_size / 2 + 1; }
  // Number of center-padded frames for a signal of n samples.
  std::size_t n_frames(std::size_t n) const { return n / hop_size + 1; }

  // Throws on invalid STFT geometry.
  void validate_stft() const;
  // Throws on invalid STFT geometry or mel range for the given rate.
  void validate(int sample_rate) const;

  friend bool operator==(const MelParamSet&, const MelParamSet&) = default;
};

// Linear STFT magnitudes, rows are bins and columns are frames.
struct Spectrogram {
  Matrix magnitudes;
  MelParamSet params;

  std::size_t n_bins() const { return magnitudes.rows(); }
  std::size_t n_frames() const { return magnitudes.cols(); }
};

// Natural-log mel magnitudes, rows are mel channels and columns are frames.
struct MelSpectrogram {
  Matrix log_mels;
  MelParamSet params;

  std::size_t n_mels() const { return log_mels.rows(); }
  std::size_t n_frames() const { return log_mels.cols(); }
};

struct FrameCurve {
  std::vector<double> values;
  int hop_size = 1;
  int win_size = 1;

  std::size_t size() const { return values.size(); }
};

}  // namespace pulsevoc
