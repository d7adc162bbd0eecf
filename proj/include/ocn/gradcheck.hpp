// Copyright 2026 OCN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "ocn/params.hpp"

namespace ocn {

/// Loss as a pure deterministic function of the parameters. Implementations
/// rebuild a fresh computation record on every call.
using LossFn = std::function<double(const ParameterSet&)>;

struct FdCoordinate {
  std::string param;
  int index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

/// Central finite differences (J(p+eps) - J(p-eps)) / (2 eps) per coordinate
/// of one named parameter, compared against the supplied analytic gradient.
/// Relative error uses max(|analytic|, |numeric|, 1e-8) as denominator.
inline FdCoordinate finite_difference_check_param(const LossFn& loss_fn, const ParameterSet& params,
                                                  const std::string& name,
                                                  const Matrix& analytic_grad, double eps) {
  require(eps > 0.0, "finite_difference_check: eps must be positive");
  ParameterSet work = params;
  Matrix& target = work.value(name);
  require(target.same_shape(analytic_grad),
          "finite_difference_check: gradient shape mismatch for '" + name + "'");

  FdCoordinate worst;
  worst.param = name;
  for (size_t i = 0; i < target.size(); ++i) {
    const double saved = target[i];
    target[i] = saved + eps;
    const double plus = loss_fn(work);
    target[i] = saved - eps;
    const double minus = loss_fn(work);
    target[i] = saved;

    const double numeric = (plus - minus) / (2.0 * eps);
    const double analytic = analytic_grad[i];
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    const double rel = std::fabs(analytic - numeric) / denom;
    if (rel >= worst.rel_err) {
      worst.index = static_cast<int>(i);
      worst.analytic = analytic;
      worst.numeric = numeric;
      worst.rel_err = rel;
    }
  }
  return worst;
}

/// Max relative error across every coordinate of every parameter.
inline double finite_difference_check(const LossFn& loss_fn, const ParameterSet& params,
                                      const Gradients& analytic, double eps) {
  double worst = 0.0;
  for (int i = 0; i < params.count(); ++i) {
    const std::string& name = params.name(i);
    const FdCoordinate c =
        finite_difference_check_param(loss_fn, params, name, analytic.at(name), eps);
    worst = std::max(worst, c.rel_err);
  }
  return worst;
}

}  // namespace ocn
