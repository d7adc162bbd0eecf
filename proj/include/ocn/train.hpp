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
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ocn/config.hpp"
#include "ocn/data.hpp"
#include "ocn/errors.hpp"
#include "ocn/gradcheck.hpp"
#include "ocn/model.hpp"
#include "ocn/optimizer.hpp"
#include "ocn/rng.hpp"
#include "ocn/schedule.hpp"

namespace ocn {

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalResult {
  double accuracy = 0.0;
  std::vector<int> predictions;  // argmax per example, lowest index on ties
};

inline EvalResult evaluate(const std::vector<Example>& data, const ParameterSet& params,
                           const ModelConfig& cfg) {
  require(!data.empty(), "evaluate: empty dataset");
  EvalResult res;
  int correct = 0;
  for (const Example& ex : data) {
    require(ex.answer >= 0, "evaluate: example lacks a gold answer");
    const int pred = argmax_index(predict_probs(params, cfg, ex));
    res.predictions.push_back(pred);
    if (pred == ex.answer) ++correct;
  }
  res.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return res;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct StepLog {
  int step = 0;  // 1-based
  double lr = 0.0;
  double loss = 0.0;
  bool has_dev = false;
  double dev_acc = 0.0;
};

inline nlohmann::json step_log_to_json(const StepLog& log) {
  nlohmann::json j{{"step", log.step}, {"lr", log.lr}, {"loss", log.loss}};
  if (log.has_dev) j["dev_acc"] = log.dev_acc;
  return j;
}

/// Everything a finished run reports: both parameter snapshots, the per-step
/// log, and the batch bookkeeping of the loss (example count, gold indices).
struct TrainResult {
  ParameterSet final_params;
  ParameterSet best_params;  // equals final_params when no dev set is given
  int best_step = -1;
  double best_dev_acc = -1.0;
  std::vector<StepLog> logs;
  int total_steps = 0;
  int example_count = 0;
  std::vector<int> gold;
  int clamp_events = 0;  // log-floor hits across all steps
};

/// Deterministic training: fixed init from the seed, fixed shuffle order,
/// one optimizer step per batch with the warmup/decay schedule. Dev accuracy
/// is measured at each epoch end; the best snapshot keeps the earliest step
/// on ties. Writes one JSON object per step to `metrics` when given.
inline TrainResult train(const std::vector<Example>& train_set,
                         const std::vector<Example>& dev_set, const ModelConfig& model_cfg,
                         const TrainSettings& settings, std::ostream* metrics = nullptr) {
  require(!train_set.empty(), "train: empty dataset");

  ModelConfig cfg = model_cfg;
  cfg.seed = settings.seed;

  const int n = static_cast<int>(train_set.size());
  const int steps_per_epoch = (n + settings.batch - 1) / settings.batch;
  const int total_steps = steps_per_epoch * settings.epochs;
  require(total_steps >= 2, "train: schedule needs at least two steps");
  const ScheduleConfig sched{settings.peak_lr, total_steps};

  TrainResult res;
  res.total_steps = total_steps;
  res.example_count = n;
  for (const Example& ex : train_set) {
    require(ex.answer >= 0, "train: example lacks a gold answer");
    res.gold.push_back(ex.answer);
  }

  ParameterSet params = init_parameters(cfg);
  AdamState adam(params);
  Rng order_rng(settings.seed + 0x9E3779B97F4A7C15ULL);
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  const double loss_penalty =
      cfg.decay_mode == DecayMode::kLossPenalty ? settings.decay : 0.0;
  const double optimizer_decay =
      cfg.decay_mode == DecayMode::kDecoupled ? settings.decay : 0.0;

  int step = 0;
  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    order_rng.shuffle(order);
    for (int start = 0; start < n; start += settings.batch) {
      const int end = std::min(n, start + settings.batch);
      std::vector<const Example*> batch;
      for (int i = start; i < end; ++i) {
        batch.push_back(&train_set[static_cast<size_t>(order[static_cast<size_t>(i)])]);
      }

      const double lr = lr_at(step, sched);
      Tape tape;
      const ModelNodes nodes = bind_model(tape, params);
      const BatchLoss bl = batch_loss(tape, nodes, cfg, batch, loss_penalty);
      const double loss = tape.value(bl.loss).at(0, 0);
      if (!std::isfinite(loss)) {
        throw NumericalError("train: non-finite loss at step " + std::to_string(step + 1));
      }
      Gradients grads = tape.backward(bl.loss);
      clip_global_norm(grads, params, settings.clip);
      adam.step(params, grads, lr, optimizer_decay);
      res.clamp_events += tape.clamp_events();

      ++step;
      StepLog log;
      log.step = step;
      log.lr = lr;
      log.loss = loss;

      const bool epoch_end = end == n;
      if (epoch_end && !dev_set.empty()) {
        const EvalResult dev = evaluate(dev_set, params, cfg);
        log.has_dev = true;
        log.dev_acc = dev.accuracy;
        if (dev.accuracy > res.best_dev_acc) {
          res.best_dev_acc = dev.accuracy;
          res.best_step = step;
          res.best_params = params;
        }
      }
      res.logs.push_back(log);
      if (metrics) *metrics << step_log_to_json(log).dump() << "\n";
    }
  }

  res.final_params = params;
  if (dev_set.empty()) {
    res.best_params = params;
    res.best_step = step;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Model-level gradient check
// ---------------------------------------------------------------------------

struct GradCheckGroup {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckGroup> groups;
  double max_rel_err = 0.0;
  double tolerance = 1e-4;

  bool pass() const { return max_rel_err < tolerance; }
};

/// Compares reverse-mode gradients of the full batch loss (one synthetic
/// example) against central finite differences, per parameter group.
/// `inject_fault` corrupts one analytic gradient first; the report must then
/// fail, which exercises the harness itself.
inline GradCheckReport grad_check_model(const ModelConfig& model_cfg, uint64_t data_seed = 11,
                                        double eps = 1e-5, bool inject_fault = false,
                                        double penalty_lambda = 0.01) {
  SynthSpec spec;
  spec.task = SynthTask::kLexicalOverlap;
  spec.seed = data_seed;
  spec.count = 1;
  spec.vocab_size = 20;
  spec.options = model_cfg.options;
  spec.article_min = 8;
  spec.article_max = 12;
  spec.question_min = 2;
  spec.question_max = 3;
  spec.option_min = 2;
  spec.option_max = 3;

  Vocabulary vocab;
  const std::vector<Example> data = synth_generate(spec, vocab);

  ModelConfig cfg = model_cfg;
  cfg.vocab_size = vocab.size();

  const double l2 = cfg.decay_mode == DecayMode::kLossPenalty ? penalty_lambda : 0.0;
  const Example& ex = data.front();
  const LossFn loss_fn = [&cfg, &ex, l2](const ParameterSet& p) {
    Tape tape;
    const ModelNodes nodes = bind_model(tape, p);
    return tape.value(batch_loss(tape, nodes, cfg, {&ex}, l2).loss).at(0, 0);
  };

  const ParameterSet params = init_parameters(cfg);
  Tape tape;
  const ModelNodes nodes = bind_model(tape, params);
  Gradients analytic = tape.backward(batch_loss(tape, nodes, cfg, {&ex}, l2).loss);
  if (inject_fault) analytic.at("w_p")[0] += 0.5;

  GradCheckReport report;
  for (int i = 0; i < params.count(); ++i) {
    const std::string& name = params.name(i);
    const FdCoordinate worst =
        finite_difference_check_param(loss_fn, params, name, analytic.at(name), eps);
    report.groups.push_back({name, worst.rel_err});
    report.max_rel_err = std::max(report.max_rel_err, worst.rel_err);
  }
  return report;
}

}  // namespace ocn
