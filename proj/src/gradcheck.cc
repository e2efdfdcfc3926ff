// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pulsevoc/gradcheck.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pulsevoc/error.h"

namespace pulsevoc {

GradCheckResult finite_difference_check(const std::function<nn::Var()>& fn, std::vector<nn::Var> params,
                                        const GradCheckOptions& opts) {
  if (!(opts.eps > 0.0)) throw_invalid(fmt::format("finite_difference_check: eps must be positive, got {}", opts.eps));
  for (nn::Var& p : params) {
    if (!p.requires_grad()) throw_invalid("finite_difference_check: parameter does not require grad");
    p.zero_grad();
  }
  std::uint64_t base_branches = 0;
  {
    const nn::BranchRecorder rec;
    nn::backward(fn());
    base_branches = rec.fingerprint();
  }
  auto eval = [&](std::uint64_t& branches) {
    const nn::BranchRecorder rec;
    const double v = fn().item();
    branches = rec.fingerprint();
    return v;
  };

  // Flat coordinate list, optionally filtered, then sampled without replacement.
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p].value().numel(); ++i) {
      if (!opts.include || opts.include(p, i)) coords.emplace_back(p, i);
    }
  }
  Rng rng(mix_seed(opts.seed, 0x6c));
  GradCheckResult res;
  for (std::size_t k = 0; k < coords.size() && res.checked < opts.samples; ++k) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, static_cast<long long>(k),
                                                        static_cast<long long>(coords.size()) - 1));
    std::swap(coords[k], coords[j]);
    const auto [p, i] = coords[k];
    nn::Var& var = params[p];
    const double analytic = var.grad().numel() ? var.grad()[i] : 0.0;
    double& x = var.mutable_value()[i];
    const double x0 = x;
    std::uint64_t up_branches = 0, down_branches = 0;
    x = x0 + opts.eps;
    const double up = eval(up_branches);
    x = x0 - opts.eps;
    const double down = eval(down_branches);
    x = x0;
    if (opts.skip_kinks && (up_branches != base_branches || down_branches != base_branches)) {
      ++res.skipped_kinks;
      continue;
    }
    const double numeric = (up - down) / (2.0 * opts.eps);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), opts.abs_floor});
    const double rel = std::abs(analytic - numeric) / denom;
    ++res.checked;
    if (rel > res.max_rel_error || res.checked == 1) {
      res.max_rel_error = rel;
      res.worst_param = p;
      res.worst_index = i;
      res.worst_analytic = analytic;
      res.worst_numeric = numeric;
    }
  }
  for (nn::Var& p : params) p.zero_grad();
  return res;
}

}  // namespace pulsevoc
