// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "pulsevoc/nn/autograd.h"
#include "pulsevoc/types.h"

namespace pulsevoc::nn {

// Elementwise, equal shapes.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var neg(const Var& a);
Var leaky_relu(const Var& x, double slope);
Var tanh(const Var& x);
// log(max(x, floor)); zero gradient below the floor.
Var log_floor(const Var& x, double floor);
Var mean_of(const std::vector<Var>& xs);
Var reshape(const Var& x, Shape shape);

// Keeps [start, start + len) of the last axis of a rank-3 tensor.
Var narrow_last(const Var& x, std::size_t start, std::size_t len);

// [B, Ca, ...] ++ [B, Cb, ...] -> [B, Ca + Cb, ...]
Var concat_channels(const Var& a, const Var& b);

struct Conv1dOptions {
  int stride = 1;
  int dilation = 1;
  int pad_left = 0;
  int pad_right = 0;
};

// x [B, Cin, T], weight [Cout, Cin, K], bias [Cout] or undefined.
Var conv1d(const Var& x, const Var& weight, const Var& bias, const Conv1dOptions& opts);

// x [B, Cin, T], weight [Cin, Cout, K]. Output sample j takes full-length
// position j + crop; out_len samples are produced.
Var conv_transpose1d(const Var& x, const Var& weight, const Var& bias, int stride, int crop,
                     std::size_t out_len);

struct Conv2dOptions {
  int stride_h = 1;
  int stride_w = 1;
  int pad_h = 0;
  int pad_w = 0;
};

// x [B, Cin, H, W], weight [Cout, Cin, KH, KW].
Var conv2d(const Var& x, const Var& weight, const Var& bias, const Conv2dOptions& opts);

// weight = g * v / ||v|| with the norm taken per leading (output) index.
Var weight_norm(const Var& v, const Var& g);

// [B, 1, T] -> reflect-pad on the right to a multiple of period ->
// [B, 1, T' / period, period].
Var period_fold(const Var& x, int period);

// [B, 1, T] -> [B, 1, frames, bins] Hann magnitude STFT, reflect center pad.
Var stft_magnitude(const Var& x, int fft_size, int hop_size, int win_size);

// [B, 1, F, K] magnitudes, filterbank [M, K] -> [B, M, F].
Var mel_project(const Var& magnitudes, const Matrix& filterbank);

// [B, 1, T] -> [B, 1, frames]; frame t is the max over
// [t*hop, t*hop + win), frames = ceil(T / hop). Gradient goes to the first
// maximal sample.
Var max_pool_frames(const Var& x, int win_size, int hop_size);

// Scalar reductions.
Var mse(const Var& a, const Var& b);
Var mae(const Var& a, const Var& b);
// mean(softplus(sign * x)), softplus evaluated as max(z,0) + log1p(exp(-|z|)).
Var softplus_mean(const Var& x, double sign);

double softplus(double z);

}  // namespace pulsevoc::nn
