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

#include "ocn/errors.hpp"

namespace ocn {

/// Linear warmup over the first 10% of steps, then linear decay to zero.
struct ScheduleConfig {
  double peak_lr = 3e-5;
  int total_steps = 0;

  // Integer ceil(total / 10); floating-point ceil(0.1 * 1000) rounds to 101.
  int warmup_steps() const { return (total_steps + 9) / 10; }
};

/// Piecewise-linear rate: 0 at step 0, peak at the warmup boundary, 0 at
/// total_steps. Training consumes 0-based step indices, so the first update
/// runs at rate 0 and the boundary value is hit exactly once.
inline double lr_at(int step, const ScheduleConfig& cfg) {
  require(cfg.peak_lr > 0.0, "lr_at: peak_lr must be positive");
  require(cfg.total_steps >= 2, "lr_at: schedule needs at least two steps");
  require(step >= 0 && step <= cfg.total_steps, "lr_at: step outside the schedule");
  const int w = cfg.warmup_steps();
  // The boundary returns peak_lr itself; peak * w / w can miss it by an ulp.
  if (step == w) return cfg.peak_lr;
  if (step < w) {
    return cfg.peak_lr * static_cast<double>(step) / static_cast<double>(w);
  }
  return cfg.peak_lr * static_cast<double>(cfg.total_steps - step) /
         static_cast<double>(cfg.total_steps - w);
}

}  // namespace ocn
