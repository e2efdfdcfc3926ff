// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pulsevoc/nn/optim.h"

#include <fmt/format.h>

#include <cmath>

#include "pulsevoc/error.h"

namespace pulsevoc::nn {

void AdamConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw_invalid(fmt::format("training.lr must be positive, got {}", lr));
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw_invalid(fmt::format("training.beta1 must be in [0, 1), got {}", beta1));
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw_invalid(fmt::format("training.beta2 must be in [0, 1), got {}", beta2));
  if (!(eps > 0.0)) throw_invalid(fmt::format("training.eps must be positive, got {}", eps));
}

Adam::Adam(std::vector<Var> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  cfg_.validate();
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Var& p : params_) {
    if (!p.requires_grad()) throw_invalid("Adam: parameter does not require grad");
    m_.emplace_back(p.shape(), 0.0);
    v_.emplace_back(p.shape(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Var& p = params_[i];
    const Tensor& g = p.grad();
    if (g.numel() != p.value().numel()) continue;
    Tensor& w = p.mutable_value();
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::size_t k = 0; k < w.numel(); ++k) {
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
      w[k] -= cfg_.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (Var& p : params_) p.zero_grad();
}

}  // namespace pulsevoc::nn
