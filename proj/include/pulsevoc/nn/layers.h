// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include "pulsevoc/nn/autograd.h"
#include "pulsevoc/nn/ops.h"
#include "pulsevoc/rng.h"

namespace pulsevoc::nn {

struct NamedParam {
  std::string name;
  Var var;
};
using ParamList = std::vector<NamedParam>;

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng);

// Conv1dOptions with length-preserving padding for stride 1.
Conv1dOptions same_padding(int kernel, int dilation);

class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(int in_channels, int out_channels, int kernel, Conv1dOptions opts, bool weight_norm,
         Rng& rng);

  Var forward(const Var& x) const;
  // g * v / ||v|| when weight-normalized, else the raw weight.
  Var weight() const;
  bool weight_normalized() const { return weight_norm_; }
  const Conv1dOptions& options() const { return opts_; }
  int kernel() const { return static_cast<int>(v_.dim(2)); }
  void collect(const std::string& prefix, ParamList& out) const;

 private:
  Var v_;
  Var g_;  // [Cout], weight-normalized only
  Var bias_;
  Conv1dOptions opts_;
  bool weight_norm_ = false;
};

// Upsamples by stride with kernel 2 * stride; output length = stride * input.
class ConvTranspose1d {
 public:
  ConvTranspose1d() = default;
  ConvTranspose1d(int in_channels, int out_channels, int stride, Rng& rng);

  Var forward(const Var& x) const;
  void collect(const std::string& prefix, ParamList& out) const;

 private:
  Var weight_;  // [Cin, Cout, 2 * stride]
  Var bias_;
  int stride_ = 1;
};

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_channels, int out_channels, int kernel_h, int kernel_w, Conv2dOptions opts, Rng& rng);

  Var forward(const Var& x) const;
  void collect(const std::string& prefix, ParamList& out) const;

 private:
  Var weight_;
  Var bias_;
  Conv2dOptions opts_;
};

}  // namespace pulsevoc::nn
