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

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ocn/checkpoint.hpp"
#include "ocn/config.hpp"
#include "ocn/data.hpp"
#include "ocn/errors.hpp"
#include "ocn/model.hpp"
#include "ocn/train.hpp"

namespace ocn {

// Exit codes: 0 success, 1 failed gradient check, 2 usage/config/data
// problems, 3 numerical failures. Results go to stdout as JSON; diagnostics
// to stderr.

struct CliOptions {
  std::string config_path;
  std::string checkpoint_path;
  std::string data_path;
  std::string out_dir;
  bool has_seed = false;
  uint64_t seed = 0;
  bool inject_fault = false;  // gradcheck harness self-test fixture
};

namespace detail {

template <typename Fn>
int guard(Fn&& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const ContractViolation& e) {
    err << "invalid request: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  }
}

struct LoadedData {
  Vocabulary vocab;
  std::vector<Example> train;
  std::vector<Example> dev;
};

/// Builds train/dev sets from either the synth spec or RACE paths; the
/// vocabulary grows on the training split only.
inline LoadedData load_training_data(const RunConfig& cfg, std::ostream& err) {
  LoadedData data;
  if (cfg.data.has_synth) {
    data.train = synth_generate(cfg.data.synth, data.vocab);
    if (cfg.data.synth_dev_count > 0) {
      SynthSpec dev_spec = cfg.data.synth;
      dev_spec.seed = cfg.data.synth.seed + 1;
      dev_spec.count = cfg.data.synth_dev_count;
      data.dev = synth_generate(dev_spec, data.vocab);
    }
    return data;
  }
  if (cfg.data.train_path.empty()) {
    throw ConfigError("config.data.train: required (or give config.data.synth)");
  }
  LoadReport report;
  data.train = load_race_path(cfg.data.train_path, data.vocab, /*grow_vocab=*/true,
                              cfg.model.options, &report);
  for (const std::string& w : report.warnings) err << w << "\n";
  if (!cfg.data.dev_path.empty()) {
    LoadReport dev_report;
    data.dev = load_race_path(cfg.data.dev_path, data.vocab, /*grow_vocab=*/false,
                              cfg.model.options, &dev_report);
    for (const std::string& w : dev_report.warnings) err << w << "\n";
  }
  if (data.train.empty()) throw DataError("config.data.train: no usable examples");
  return data;
}

}  // namespace detail

inline int cmd_train(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return detail::guard(
      [&]() {
        if (opts.config_path.empty()) throw ConfigError("train: --config is required");
        RunConfig cfg = load_run_config(opts.config_path);
        if (opts.has_seed) cfg.train.seed = opts.seed;
        if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
        if (!opts.data_path.empty()) {
          cfg.data.train_path = opts.data_path;
          cfg.data.has_synth = false;
        }

        detail::LoadedData data = detail::load_training_data(cfg, err);
        cfg.model.vocab_size = data.vocab.size();

        std::filesystem::create_directories(cfg.out_dir);
        const std::string metrics_path = cfg.out_dir + "/metrics.jsonl";
        std::ofstream metrics(metrics_path);
        if (!metrics) throw DataError("train: cannot write '" + metrics_path + "'");

        const TrainResult res = train(data.train, data.dev, cfg.model, cfg.train, &metrics);

        ModelConfig saved_cfg = cfg.model;
        saved_cfg.seed = cfg.train.seed;
        save_checkpoint(cfg.out_dir + "/final.ckpt", res.final_params, saved_cfg, data.vocab,
                        res.total_steps);
        save_checkpoint(cfg.out_dir + "/best.ckpt", res.best_params, saved_cfg, data.vocab,
                        res.best_step);

        nlohmann::json summary{{"steps", res.total_steps},
                               {"final_loss", res.logs.back().loss},
                               {"out", cfg.out_dir}};
        if (!data.dev.empty()) {
          summary["dev_acc"] = res.logs.back().dev_acc;
          summary["best_dev_acc"] = res.best_dev_acc;
          summary["best_step"] = res.best_step;
        }
        out << summary.dump() << "\n";
        return 0;
      },
      err);
}

inline int cmd_eval(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return detail::guard(
      [&]() {
        if (opts.checkpoint_path.empty()) throw ConfigError("eval: --checkpoint is required");
        if (opts.data_path.empty()) throw ConfigError("eval: --data is required");
        CheckpointData ckpt = load_checkpoint(opts.checkpoint_path);
        LoadReport report;
        const std::vector<Example> data = load_race_path(
            opts.data_path, ckpt.vocab, /*grow_vocab=*/false, ckpt.config.options, &report);
        for (const std::string& w : report.warnings) err << w << "\n";
        if (data.empty()) throw DataError("eval: no usable examples in '" + opts.data_path + "'");

        const EvalResult res = evaluate(data, ckpt.params, ckpt.config);
        out << nlohmann::json{{"accuracy", res.accuracy},
                              {"n", static_cast<int>(data.size())}}
                   .dump()
            << "\n";
        return 0;
      },
      err);
}

inline int cmd_predict(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return detail::guard(
      [&]() {
        if (opts.checkpoint_path.empty()) throw ConfigError("predict: --checkpoint is required");
        if (opts.data_path.empty()) throw ConfigError("predict: --data is required");
        CheckpointData ckpt = load_checkpoint(opts.checkpoint_path);
        LoadReport report;
        const std::vector<Example> data =
            load_race_path(opts.data_path, ckpt.vocab, /*grow_vocab=*/false, ckpt.config.options,
                           &report, /*require_answers=*/false);
        for (const std::string& w : report.warnings) err << w << "\n";
        if (data.empty()) {
          throw DataError("predict: no usable examples in '" + opts.data_path + "'");
        }

        for (const Example& ex : data) {
          const std::vector<double> probs = predict_probs(ckpt.params, ckpt.config, ex);
          const int pick = argmax_index(probs);
          out << nlohmann::json{{"id", ex.id},
                                {"probs", probs},
                                {"letter", std::string(1, static_cast<char>('A' + pick))}}
                     .dump()
              << "\n";
        }
        return 0;
      },
      err);
}

inline int cmd_gradcheck(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return detail::guard(
      [&]() {
        if (opts.config_path.empty()) throw ConfigError("gradcheck: --config is required");
        RunConfig cfg = load_run_config(opts.config_path);
        if (opts.has_seed) cfg.train.seed = opts.seed;

        const GradCheckReport report =
            grad_check_model(cfg.model, cfg.train.seed, 1e-5, opts.inject_fault);

        nlohmann::json groups = nlohmann::json::array();
        for (const GradCheckGroup& g : report.groups) {
          groups.push_back({{"name", g.name}, {"max_rel_err", g.max_rel_err}});
        }
        out << nlohmann::json{{"pass", report.pass()},
                              {"max_rel_err", report.max_rel_err},
                              {"tolerance", report.tolerance},
                              {"groups", groups}}
                   .dump()
            << "\n";
        return report.pass() ? 0 : 1;
      },
      err);
}

inline int cmd_synth(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return detail::guard(
      [&]() {
        if (opts.config_path.empty()) throw ConfigError("synth: --config is required");
        RunConfig cfg = load_run_config(opts.config_path);
        if (!cfg.data.has_synth) throw ConfigError("synth: config.data.synth is required");
        if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
        if (opts.has_seed) cfg.data.synth.seed = opts.seed;

        std::filesystem::create_directories(cfg.out_dir);
        Vocabulary vocab;
        const std::vector<Example> train_set = synth_generate(cfg.data.synth, vocab);
        const std::string train_file = cfg.out_dir + "/train.json";
        write_race_file(train_file, train_set, vocab);

        nlohmann::json summary{{"train_file", train_file},
                               {"count", static_cast<int>(train_set.size())}};
        if (cfg.data.synth_dev_count > 0) {
          SynthSpec dev_spec = cfg.data.synth;
          dev_spec.seed = cfg.data.synth.seed + 1;
          dev_spec.count = cfg.data.synth_dev_count;
          const std::vector<Example> dev_set = synth_generate(dev_spec, vocab);
          const std::string dev_file = cfg.out_dir + "/dev.json";
          write_race_file(dev_file, dev_set, vocab);
          summary["dev_file"] = dev_file;
          summary["dev_count"] = static_cast<int>(dev_set.size());
        }
        out << summary.dump() << "\n";
        return 0;
      },
      err);
}

}  // namespace ocn
