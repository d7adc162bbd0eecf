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

#include <cmath>
#include <vector>

#include "ocn/errors.hpp"
#include "ocn/matrix.hpp"
#include "ocn/params.hpp"
#include "ocn/tape.hpp"

namespace ocn {

/// Adam with bias correction and optional decoupled weight decay. Decay
/// shrinks a parameter by lr * decay after its Adam update, and only touches
/// parameters whose decay flag is set.
class AdamState {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  explicit AdamState(const ParameterSet& params) {
    for (int i = 0; i < params.count(); ++i) {
      const Matrix& p = params.value(i);
      m_.push_back(Matrix::zeros(p.rows(), p.cols()));
      v_.push_back(Matrix::zeros(p.rows(), p.cols()));
    }
  }

  int step_count() const { return t_; }

  /// One optimizer step. Validates every gradient before mutating anything,
  /// so a non-finite gradient aborts with no partial update.
  void step(ParameterSet& params, const Gradients& grads, double lr, double decay) {
    require(static_cast<size_t>(params.count()) == m_.size(), "adam: parameter count changed");
    require(lr >= 0.0 && decay >= 0.0, "adam: negative hyperparameter");

    for (int i = 0; i < params.count(); ++i) {
      const Matrix& g = grads.at(params.name(i));
      require(g.rows() == params.value(i).rows() && g.cols() == params.value(i).cols(),
              "adam: gradient shape mismatch for '" + params.name(i) + "'");
      if (!g.all_finite()) {
        throw NumericalError("adam: non-finite gradient for '" + params.name(i) + "'");
      }
    }

    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, t_);
    const double bc2 = 1.0 - std::pow(kBeta2, t_);
    for (int i = 0; i < params.count(); ++i) {
      Matrix& p = params.value(i);
      Matrix& m = m_[static_cast<size_t>(i)];
      Matrix& v = v_[static_cast<size_t>(i)];
      const Matrix& g = grads.at(params.name(i));
      const bool shrink = decay > 0.0 && params.decays(i);
      for (size_t e = 0; e < p.size(); ++e) {
        m[e] = kBeta1 * m[e] + (1.0 - kBeta1) * g[e];
        v[e] = kBeta2 * v[e] + (1.0 - kBeta2) * g[e] * g[e];
        const double m_hat = m[e] / bc1;
        const double v_hat = v[e] / bc2;
        p[e] -= lr * m_hat / (std::sqrt(v_hat) + kEps);
        if (shrink) p[e] *= 1.0 - lr * decay;
      }
    }
  }

 private:
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  int t_ = 0;
};

/// Scales all gradients by clip / norm when the global L2 norm exceeds clip.
/// Returns the pre-clip norm. clip <= 0 disables clipping.
inline double clip_global_norm(Gradients& grads, const ParameterSet& params, double clip) {
  double sq = 0.0;
  for (int i = 0; i < params.count(); ++i) {
    const Matrix& g = grads.at(params.name(i));
    for (size_t e = 0; e < g.size(); ++e) sq += g[e] * g[e];
  }
  const double norm = std::sqrt(sq);
  if (clip > 0.0 && norm > clip) {
    const double factor = clip / norm;
    for (int i = 0; i < params.count(); ++i) {
      Matrix& g = grads.at(params.name(i));
      for (size_t e = 0; e < g.size(); ++e) g[e] *= factor;
    }
  }
  return norm;
}

}  // namespace ocn
