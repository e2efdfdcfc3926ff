// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pulsevoc/nn/layers.h"

#include <fmt/format.h>

#include <cmath>

#include "pulsevoc/error.h"

namespace pulsevoc::nn {

Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = uniform(rng, -bound, bound);
  return t;
}

Conv1dOptions same_padding(int kernel, int dilation) {
  const int total = dilation * (kernel - 1);
  Conv1dOptions o;
  o.dilation = dilation;
  o.pad_left = total / 2;
  o.pad_right = total - total / 2;
  return o;
}

Conv1d::Conv1d(int in_channels, int out_channels, int kernel, Conv1dOptions opts, bool weight_norm,
               Rng& rng)
    : opts_(opts), weight_norm_(weight_norm) {
  if (in_channels <= 0 || out_channels <= 0 || kernel <= 0) {
    throw_invalid(fmt::format("Conv1d: invalid geometry in={} out={} kernel={}", in_channels,
                              out_channels, kernel));
  }
  const auto cin = static_cast<std::size_t>(in_channels);
  const auto cout = static_cast<std::size_t>(out_channels);
  const auto k = static_cast<std::size_t>(kernel);
  Tensor v = init_uniform({cout, cin, k}, cin * k, rng);
  if (weight_norm_) {
    Tensor g({cout});
    for (std::size_t r = 0; r < cout; ++r) {
      double sq = 0.0;
      for (std::size_t c = 0; c < cin * k; ++c) sq += v[r * cin * k + c] * v[r * cin * k + c];
      g[r] = std::sqrt(sq);
    }
    g_ = parameter(std::move(g));
  }
  v_ = parameter(std::move(v));
  bias_ = parameter(init_uniform({cout}, cin * k, rng));
}

Var Conv1d::weight() const { return weight_norm_ ? weight_norm(v_, g_) : v_; }

Var Conv1d::forward(const Var& x) const { return conv1d(x, weight(), bias_, opts_); }

void Conv1d::collect(const std::string& prefix, ParamList& out) const {
  if (weight_norm_) {
    out.push_back({prefix + ".weight_v", v_});
    out.push_back({prefix + ".weight_g", g_});
  } else {
    out.push_back({prefix + ".weight", v_});
  }
  out.push_back({prefix + ".bias", bias_});
}

ConvTranspose1d::ConvTranspose1d(int in_channels, int out_channels, int stride, Rng& rng)
    : stride_(stride) {
  if (in_channels <= 0 || out_channels <= 0 || stride <= 0) {
    throw_invalid(fmt::format("ConvTranspose1d: invalid geometry in={} out={} stride={}", in_channels,
                              out_channels, stride));
  }
  const auto cin = static_cast<std::size_t>(in_channels);
  const auto cout = static_cast<std::size_t>(out_channels);
  const auto k = static_cast<std::size_t>(2 * stride);
  // Each output sample sees cin * 2 taps.
  weight_ = parameter(init_uniform({cin, cout, k}, cin * 2, rng));
  bias_ = parameter(init_uniform({cout}, cin * 2, rng));
}

Var ConvTranspose1d::forward(const Var& x) const {
  return conv_transpose1d(x, weight_, bias_, stride_, stride_ / 2, x.dim(2) * stride_);
}

void ConvTranspose1d::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight_});
  out.push_back({prefix + ".bias", bias_});
}

Conv2d::Conv2d(int in_channels, int out_channels, int kernel_h, int kernel_w, Conv2dOptions opts,
               Rng& rng)
    : opts_(opts) {
  if (in_channels <= 0 || out_channels <= 0 || kernel_h <= 0 || kernel_w <= 0) {
    throw_invalid(fmt::format("Conv2d: invalid geometry in={} out={} kernel={}x{}", in_channels,
                              out_channels, kernel_h, kernel_w));
  }
  const auto cin = static_cast<std::size_t>(in_channels);
  const auto cout = static_cast<std::size_t>(out_channels);
  const auto kh = static_cast<std::size_t>(kernel_h);
  const auto kw = static_cast<std::size_t>(kernel_w);
  weight_ = parameter(init_uniform({cout, cin, kh, kw}, cin * kh * kw, rng));
  bias_ = parameter(init_uniform({cout}, cin * kh * kw, rng));
}

Var Conv2d::forward(const Var& x) const { return conv2d(x, weight_, bias_, opts_); }

void Conv2d::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight_});
  out.push_back({prefix + ".bias", bias_});
}

}  // namespace pulsevoc::nn
