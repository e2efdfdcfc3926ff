// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <vector>

#include "pulsevoc/nn/autograd.h"

namespace pulsevoc::nn {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.8;
  double beta2 = 0.99;
  double eps = 1e-8;

  void validate() const;
};

// Bias-corrected Adam over a fixed parameter list.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Var> params, AdamConfig cfg);

  // Parameters without a gradient buffer are skipped.
  void step();
  void zero_grad();

  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }
  std::int64_t steps() const { return t_; }
  const std::vector<Var>& params() const { return params_; }

  // Moment buffers in parameter order; used by checkpointing.
  std::vector<Tensor>& first_moments() { return m_; }
  std::vector<Tensor>& second_moments() { return v_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }
  void set_steps(std::int64_t t) { t_ = t; }

 private:
  std::vector<Var> params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  AdamConfig cfg_;
  std::int64_t t_ = 0;
};

}  // namespace pulsevoc::nn
