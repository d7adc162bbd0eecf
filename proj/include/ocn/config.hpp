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

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "ocn/data.hpp"
#include "ocn/errors.hpp"
#include "ocn/model.hpp"

namespace ocn {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                const std::set<std::string>& allowed,
                                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
  }
}

template <typename T>
T get_or(const nlohmann::json& obj, const std::string& key, T fallback,
         const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

inline std::string get_string(const nlohmann::json& obj, const std::string& key,
                              const std::string& fallback, const std::string& where) {
  return get_or<std::string>(obj, key, fallback, where);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ModelConfig <-> JSON (also the checkpoint's config echo)
// ---------------------------------------------------------------------------

inline nlohmann::json model_config_to_json(const ModelConfig& cfg) {
  return nlohmann::json{
      {"d", cfg.d},
      {"options", cfg.options},
      {"vocab_size", cfg.vocab_size},
      {"init_scale", cfg.init_scale},
      {"ablate_comparison", cfg.ablate_comparison},
      {"decay_mode", to_string(cfg.decay_mode)},
      {"seed", cfg.seed},
      {"limits",
       {{"article", cfg.limits.article},
        {"question", cfg.limits.question},
        {"option", cfg.limits.option}}},
  };
}

inline ModelConfig model_config_from_json(const nlohmann::json& j, const std::string& where) {
  detail::reject_unknown_keys(j,
                              {"d", "options", "vocab_size", "init_scale", "ablate_comparison",
                               "decay_mode", "seed", "limits"},
                              where);
  ModelConfig cfg;
  cfg.d = detail::get_or(j, "d", cfg.d, where);
  cfg.options = detail::get_or(j, "options", cfg.options, where);
  cfg.vocab_size = detail::get_or(j, "vocab_size", cfg.vocab_size, where);
  cfg.init_scale = detail::get_or(j, "init_scale", cfg.init_scale, where);
  cfg.ablate_comparison = detail::get_or(j, "ablate_comparison", cfg.ablate_comparison, where);
  cfg.decay_mode =
      decay_mode_from_string(detail::get_string(j, "decay_mode", to_string(cfg.decay_mode), where));
  cfg.seed = detail::get_or<uint64_t>(j, "seed", cfg.seed, where);
  if (j.contains("limits")) {
    const nlohmann::json& l = j.at("limits");
    detail::reject_unknown_keys(l, {"article", "question", "option"}, where + ".limits");
    cfg.limits.article = detail::get_or(l, "article", cfg.limits.article, where + ".limits");
    cfg.limits.question = detail::get_or(l, "question", cfg.limits.question, where + ".limits");
    cfg.limits.option = detail::get_or(l, "option", cfg.limits.option, where + ".limits");
  }
  if (cfg.d < 1) throw ConfigError(where + ".d: must be >= 1");
  if (cfg.options < 2) throw ConfigError(where + ".options: must be >= 2");
  if (cfg.init_scale <= 0.0) throw ConfigError(where + ".init_scale: must be > 0");
  if (cfg.limits.article < 1 || cfg.limits.question < 1 || cfg.limits.option < 1) {
    throw ConfigError(where + ".limits: all limits must be >= 1");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// SynthSpec <-> JSON
// ---------------------------------------------------------------------------

inline SynthSpec synth_spec_from_json(const nlohmann::json& j, const std::string& where) {
  detail::reject_unknown_keys(j,
                              {"task", "seed", "count", "vocab_size", "options", "article_min",
                               "article_max", "question_min", "question_max", "option_min",
                               "option_max", "dev_count"},
                              where);
  SynthSpec spec;
  if (!j.contains("task")) throw ConfigError(where + ".task: required");
  spec.task = synth_task_from_string(detail::get_string(j, "task", "", where));
  spec.seed = detail::get_or<uint64_t>(j, "seed", spec.seed, where);
  spec.count = detail::get_or(j, "count", spec.count, where);
  spec.vocab_size = detail::get_or(j, "vocab_size", spec.vocab_size, where);
  spec.options = detail::get_or(j, "options", spec.options, where);
  spec.article_min = detail::get_or(j, "article_min", spec.article_min, where);
  spec.article_max = detail::get_or(j, "article_max", spec.article_max, where);
  spec.question_min = detail::get_or(j, "question_min", spec.question_min, where);
  spec.question_max = detail::get_or(j, "question_max", spec.question_max, where);
  spec.option_min = detail::get_or(j, "option_min", spec.option_min, where);
  spec.option_max = detail::get_or(j, "option_max", spec.option_max, where);

  if (spec.count < 1) throw ConfigError(where + ".count: must be >= 1");
  if (spec.vocab_size < 20) throw ConfigError(where + ".vocab_size: must be >= 20");
  if (spec.article_min > spec.article_max || spec.question_min > spec.question_max ||
      spec.option_min > spec.option_max || spec.question_min < 1 || spec.option_min < 1 ||
      spec.article_min < 1) {
    throw ConfigError(where + ": invalid length ranges");
  }
  return spec;
}

inline nlohmann::json synth_spec_to_json(const SynthSpec& spec) {
  return nlohmann::json{
      {"task", to_string(spec.task)},         {"seed", spec.seed},
      {"count", spec.count},                  {"vocab_size", spec.vocab_size},
      {"options", spec.options},              {"article_min", spec.article_min},
      {"article_max", spec.article_max},      {"question_min", spec.question_min},
      {"question_max", spec.question_max},    {"option_min", spec.option_min},
      {"option_max", spec.option_max},
  };
}

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

struct DataConfig {
  std::string train_path;  // RACE-format file or directory
  std::string dev_path;
  bool has_synth = false;
  SynthSpec synth;
  int synth_dev_count = 0;
};

struct TrainSettings {
  int epochs = 3;
  int batch = 12;
  double peak_lr = 3e-5;
  double decay = 0.01;
  double clip = 1.0;  // 0 disables clipping
  uint64_t seed = 0;
};

struct RunConfig {
  ModelConfig model;
  DataConfig data;
  TrainSettings train;
  std::string out_dir = "out";
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(j, {"model", "data", "train", "out"}, "config");
  RunConfig cfg;
  if (j.contains("model")) cfg.model = model_config_from_json(j.at("model"), "config.model");

  if (j.contains("data")) {
    const nlohmann::json& d = j.at("data");
    detail::reject_unknown_keys(d, {"train", "dev", "synth"}, "config.data");
    cfg.data.train_path = detail::get_string(d, "train", "", "config.data");
    cfg.data.dev_path = detail::get_string(d, "dev", "", "config.data");
    if (d.contains("synth")) {
      cfg.data.has_synth = true;
      cfg.data.synth = synth_spec_from_json(d.at("synth"), "config.data.synth");
      cfg.data.synth_dev_count =
          detail::get_or(d.at("synth"), "dev_count", 0, "config.data.synth");
      if (cfg.data.synth_dev_count < 0) {
        throw ConfigError("config.data.synth.dev_count: must be >= 0");
      }
      if (cfg.data.synth.options != cfg.model.options) {
        throw ConfigError("config.data.synth.options: disagrees with config.model.options");
      }
    }
    if (cfg.data.has_synth && !cfg.data.train_path.empty()) {
      throw ConfigError("config.data: give either train or synth, not both");
    }
  }

  if (j.contains("train")) {
    const nlohmann::json& t = j.at("train");
    detail::reject_unknown_keys(t, {"epochs", "batch", "peak_lr", "decay", "clip", "seed"},
                                "config.train");
    cfg.train.epochs = detail::get_or(t, "epochs", cfg.train.epochs, "config.train");
    cfg.train.batch = detail::get_or(t, "batch", cfg.train.batch, "config.train");
    cfg.train.peak_lr = detail::get_or(t, "peak_lr", cfg.train.peak_lr, "config.train");
    cfg.train.decay = detail::get_or(t, "decay", cfg.train.decay, "config.train");
    cfg.train.clip = detail::get_or(t, "clip", cfg.train.clip, "config.train");
    cfg.train.seed = detail::get_or<uint64_t>(t, "seed", cfg.train.seed, "config.train");
    if (cfg.train.epochs < 1) throw ConfigError("config.train.epochs: must be >= 1");
    if (cfg.train.batch < 1) throw ConfigError("config.train.batch: must be >= 1");
    if (cfg.train.peak_lr <= 0.0) throw ConfigError("config.train.peak_lr: must be > 0");
    if (cfg.train.decay < 0.0) throw ConfigError("config.train.decay: must be >= 0");
    if (cfg.train.clip < 0.0) throw ConfigError("config.train.clip: must be >= 0");
  }

  cfg.out_dir = detail::get_string(j, "out", cfg.out_dir, "config");
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream ifs(path);
  if (!ifs) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ifs);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON (" + e.what() + ")");
  }
  return run_config_from_json(j);
}

}  // namespace ocn
