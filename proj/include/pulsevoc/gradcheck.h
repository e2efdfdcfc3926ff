// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "pulsevoc/nn/autograd.h"
#include "pulsevoc/rng.h"

namespace pulsevoc {

struct GradCheckOptions {
  double eps = 1e-3;
  // Coordinates checked; all of them when the parameters hold fewer.
  std::size_t samples = 128;
  // Denominator floor of the relative error.
  double abs_floor = 1e-6;
  std::uint64_t seed = 0;
  // Optional filter; false skips a (parameter, element) coordinate.
  std::function<bool(std::size_t, std::size_t)> include;
  // Skip coordinates whose +-eps evaluations take a different branch of a
  // piecewise op than the unperturbed one.
  bool skip_kinks = true;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Central differences (f(x+eps) - f(x-eps)) / 2eps against the backward
/// pass at randomly drawn coordinates. The relative error of a coordinate is
/// |a - n| / max(|a|, |n|, abs_floor). fn must rebuild its graph from the
/// current parameter values on every call. Sampled coordinates skipped for
/// crossing a kink do not count towards samples.
GradCheckResult finite_difference_check(const std::function<nn::Var()>& fn, std::vector<nn::Var> params,
                                        const GradCheckOptions& opts = {});

}  // namespace pulsevoc
