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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "catch_amalgamated.hpp"
#include "json.hpp"
#include "ocn/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using ocn::CliOptions;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& p, const std::string& content) {
  std::ofstream ofs(p);
  ofs << content;
}

std::string read_file(const std::string& p) {
  std::ifstream ifs(p, std::ios::binary);
  REQUIRE(ifs.good());
  std::stringstream ss;
  ss << ifs.rdbuf();
  return ss.str();
}

/// A complete synthetic run config (training, dev split, small model).
json synth_run_config(const std::string& out_dir) {
  return json{
      {"model",
       {{"d", 4},
        {"options", 4},
        {"init_scale", 0.2},
        {"limits", {{"article", 10}, {"question", 3}, {"option", 3}}}}},
      {"data",
       {{"synth",
         {{"task", "lexical_overlap"},
          {"seed", 6},
          {"count", 16},
          {"dev_count", 8},
          {"vocab_size", 25},
          {"article_min", 6},
          {"article_max", 10},
          {"question_min", 2},
          {"question_max", 3},
          {"option_min", 2},
          {"option_max", 3}}}}},
      {"train",
       {{"epochs", 2}, {"batch", 8}, {"peak_lr", 1e-3}, {"seed", 4}}},
      {"out", out_dir},
  };
}

/// The pinned gradient-check instance (well away from the relative-error
/// noise floor in every decay/ablation combination).
json gradcheck_config() {
  return json{
      {"model",
       {{"d", 4},
        {"options", 4},
        {"init_scale", 0.6},
        {"seed", 5},
        {"limits", {{"article", 12}, {"question", 5}, {"option", 3}}}}},
      {"train", {{"seed", 16}}},
  };
}

struct CmdResult {
  int code = 0;
  std::string out;
  std::string err;
};

template <typename Fn>
CmdResult run_cmd(Fn&& fn, const CliOptions& opts) {
  std::ostringstream out;
  std::ostringstream err;
  CmdResult res;
  res.code = fn(opts, out, err);
  res.out = out.str();
  res.err = err.str();
  return res;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(OCN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return (status >> 8) & 0xff;
}

}  // namespace

TEST_CASE("missing required flags are usage errors") {
  const CmdResult train = run_cmd(ocn::cmd_train, CliOptions{});
  REQUIRE(train.code == 2);
  REQUIRE(train.err.find("--config") != std::string::npos);

  const CmdResult eval = run_cmd(ocn::cmd_eval, CliOptions{});
  REQUIRE(eval.code == 2);
  const CmdResult predict = run_cmd(ocn::cmd_predict, CliOptions{});
  REQUIRE(predict.code == 2);
  const CmdResult gradcheck = run_cmd(ocn::cmd_gradcheck, CliOptions{});
  REQUIRE(gradcheck.code == 2);
}

TEST_CASE("config problems are reported as exit code 2") {
  TempDir dir("ocn_cli_badcfg");

  write_file(dir.file("unknown.json"), R"({"model": {"d": 4}, "mystery": 1})");
  CliOptions opts;
  opts.config_path = dir.file("unknown.json");
  CmdResult res = run_cmd(ocn::cmd_train, opts);
  REQUIRE(res.code == 2);
  REQUIRE(res.err.find("unknown key") != std::string::npos);

  write_file(dir.file("broken.json"), "{ this is not json");
  opts.config_path = dir.file("broken.json");
  res = run_cmd(ocn::cmd_train, opts);
  REQUIRE(res.code == 2);

  // A config naming a dataset that does not exist.
  write_file(dir.file("nodata.json"),
             R"({"model": {"d": 4}, "data": {"train": "/no/such/path"}})");
  opts.config_path = dir.file("nodata.json");
  res = run_cmd(ocn::cmd_train, opts);
  REQUIRE(res.code == 2);
  REQUIRE(res.err.find("/no/such/path") != std::string::npos);
}

TEST_CASE("a synthetic training run writes metrics, checkpoints, and a summary") {
  TempDir dir("ocn_cli_train");
  const std::string cfg_path = dir.file("run.json");
  const std::string out_dir = dir.file("out");
  write_file(cfg_path, synth_run_config(out_dir).dump());

  CliOptions opts;
  opts.config_path = cfg_path;
  const CmdResult res = run_cmd(ocn::cmd_train, opts);
  REQUIRE(res.code == 0);

  const json summary = json::parse(res.out);
  REQUIRE(summary.at("steps").get<int>() == 4);
  REQUIRE(std::isfinite(summary.at("final_loss").get<double>()));
  REQUIRE(summary.contains("dev_acc"));
  REQUIRE(summary.contains("best_dev_acc"));
  REQUIRE(summary.at("best_step").get<int>() >= 1);

  REQUIRE(fs::exists(out_dir + "/final.ckpt"));
  REQUIRE(fs::exists(out_dir + "/best.ckpt"));

  // One JSON line per step; epoch ends carry dev accuracy.
  std::istringstream metrics(read_file(out_dir + "/metrics.jsonl"));
  std::string line;
  int steps = 0;
  int dev_lines = 0;
  while (std::getline(metrics, line)) {
    const json j = json::parse(line);
    ++steps;
    REQUIRE(j.at("step").get<int>() == steps);
    if (j.contains("dev_acc")) ++dev_lines;
  }
  REQUIRE(steps == 4);
  REQUIRE(dev_lines == 2);
}

TEST_CASE("rerunning one seed reproduces metrics and checkpoints byte for byte") {
  TempDir dir("ocn_cli_repro");
  const std::string out_a = dir.file("a");
  const std::string out_b = dir.file("b");
  write_file(dir.file("a.json"), synth_run_config(out_a).dump());
  write_file(dir.file("b.json"), synth_run_config(out_b).dump());

  CliOptions opts;
  opts.config_path = dir.file("a.json");
  REQUIRE(run_cmd(ocn::cmd_train, opts).code == 0);
  opts.config_path = dir.file("b.json");
  REQUIRE(run_cmd(ocn::cmd_train, opts).code == 0);

  REQUIRE(read_file(out_a + "/metrics.jsonl") == read_file(out_b + "/metrics.jsonl"));
  REQUIRE(read_file(out_a + "/final.ckpt") == read_file(out_b + "/final.ckpt"));

  // A different seed changes the metrics.
  const std::string out_c = dir.file("c");
  json cfg = synth_run_config(out_c);
  cfg["train"]["seed"] = 5;
  write_file(dir.file("c.json"), cfg.dump());
  opts.config_path = dir.file("c.json");
  REQUIRE(run_cmd(ocn::cmd_train, opts).code == 0);
  REQUIRE(read_file(out_a + "/metrics.jsonl") != read_file(out_c + "/metrics.jsonl"));
}

TEST_CASE("evaluating the best checkpoint reproduces its logged dev accuracy") {
  TempDir dir("ocn_cli_eval");
  const std::string out_dir = dir.file("out");
  write_file(dir.file("run.json"), synth_run_config(out_dir).dump());

  CliOptions train_opts;
  train_opts.config_path = dir.file("run.json");
  const CmdResult train_res = run_cmd(ocn::cmd_train, train_opts);
  REQUIRE(train_res.code == 0);
  const double best_dev_acc = json::parse(train_res.out).at("best_dev_acc").get<double>();

  // Rebuild the dev split exactly as the training run did (train vocabulary
  // first, dev from seed + 1) and write it in the dataset format.
  const ocn::RunConfig run_cfg = ocn::load_run_config(dir.file("run.json"));
  ocn::Vocabulary vocab;
  ocn::synth_generate(run_cfg.data.synth, vocab);
  ocn::SynthSpec dev_spec = run_cfg.data.synth;
  dev_spec.seed = run_cfg.data.synth.seed + 1;
  dev_spec.count = run_cfg.data.synth_dev_count;
  const std::vector<ocn::Example> dev = ocn::synth_generate(dev_spec, vocab);
  const std::string dev_file = dir.file("dev.json");
  ocn::write_race_file(dev_file, dev, vocab);

  CliOptions eval_opts;
  eval_opts.checkpoint_path = out_dir + "/best.ckpt";
  eval_opts.data_path = dev_file;
  const CmdResult eval_res = run_cmd(ocn::cmd_eval, eval_opts);
  REQUIRE(eval_res.code == 0);
  const json report = json::parse(eval_res.out);
  REQUIRE(report.at("n").get<int>() == 8);
  REQUIRE(report.at("accuracy").get<double>() == best_dev_acc);

  // An empty dataset is a data error.
  write_file(dir.file("empty.json"), "[]");
  eval_opts.data_path = dir.file("empty.json");
  REQUIRE(run_cmd(ocn::cmd_eval, eval_opts).code == 2);

  // A missing checkpoint is too.
  eval_opts.checkpoint_path = dir.file("missing.ckpt");
  eval_opts.data_path = dev_file;
  REQUIRE(run_cmd(ocn::cmd_eval, eval_opts).code == 2);
}

TEST_CASE("prediction emits a distribution and a letter per question") {
  TempDir dir("ocn_cli_predict");
  const std::string out_dir = dir.file("out");
  write_file(dir.file("run.json"), synth_run_config(out_dir).dump());
  CliOptions train_opts;
  train_opts.config_path = dir.file("run.json");
  REQUIRE(run_cmd(ocn::cmd_train, train_opts).code == 0);

  // Answerless prose input; unseen words fall back to the unknown token.
  write_file(dir.file("ask.json"), R"({
    "id": "ask-1",
    "article": "The festival ran for three days beside the harbor.",
    "questions": ["How long did the festival run?", "Where was it held?"],
    "options": [["three days", "one week", "a month", "two hours"],
                ["beside the harbor", "in a field", "at the mall", "on a hill"]]
  })");

  CliOptions opts;
  opts.checkpoint_path = out_dir + "/final.ckpt";
  opts.data_path = dir.file("ask.json");
  const CmdResult res = run_cmd(ocn::cmd_predict, opts);
  REQUIRE(res.code == 0);

  std::istringstream lines(res.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const json j = json::parse(line);
    REQUIRE(j.at("id").get<std::string>() == "ask-1#" + std::to_string(count));
    const std::vector<double> probs = j.at("probs").get<std::vector<double>>();
    REQUIRE(probs.size() == 4);
    double sum = 0.0;
    for (double p : probs) {
      REQUIRE(p >= 0.0);
      sum += p;
    }
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
    const std::string letter = j.at("letter").get<std::string>();
    REQUIRE(letter.size() == 1);
    REQUIRE(letter[0] >= 'A');
    REQUIRE(letter[0] <= 'D');
    ++count;
  }
  REQUIRE(count == 2);
}

TEST_CASE("the gradient check command reports per-group errors and pass state") {
  TempDir dir("ocn_cli_gradcheck");
  write_file(dir.file("gc.json"), gradcheck_config().dump());

  CliOptions opts;
  opts.config_path = dir.file("gc.json");
  const CmdResult res = run_cmd(ocn::cmd_gradcheck, opts);
  REQUIRE(res.code == 0);
  const json report = json::parse(res.out);
  REQUIRE(report.at("pass").get<bool>());
  REQUIRE(report.at("max_rel_err").get<double>() < report.at("tolerance").get<double>());
  REQUIRE(report.at("groups").size() == 17);

  opts.inject_fault = true;
  const CmdResult faulty = run_cmd(ocn::cmd_gradcheck, opts);
  REQUIRE(faulty.code == 1);
  REQUIRE_FALSE(json::parse(faulty.out).at("pass").get<bool>());
}

TEST_CASE("synthetic dataset files are deterministic in the seed") {
  TempDir dir("ocn_cli_synth");
  json cfg{
      {"model", {{"options", 4}}},
      {"data",
       {{"synth",
         {{"task", "near_duplicate_distractors"},
          {"seed", 9},
          {"count", 12},
          {"dev_count", 5},
          {"vocab_size", 30}}}}},
  };

  cfg["out"] = dir.file("a");
  write_file(dir.file("a.json"), cfg.dump());
  cfg["out"] = dir.file("b");
  write_file(dir.file("b.json"), cfg.dump());

  CliOptions opts;
  opts.config_path = dir.file("a.json");
  CmdResult res = run_cmd(ocn::cmd_synth, opts);
  REQUIRE(res.code == 0);
  const json summary = json::parse(res.out);
  REQUIRE(summary.at("count").get<int>() == 12);
  REQUIRE(summary.at("dev_count").get<int>() == 5);

  opts.config_path = dir.file("b.json");
  REQUIRE(run_cmd(ocn::cmd_synth, opts).code == 0);
  REQUIRE(read_file(dir.file("a") + "/train.json") == read_file(dir.file("b") + "/train.json"));
  REQUIRE(read_file(dir.file("a") + "/dev.json") == read_file(dir.file("b") + "/dev.json"));

  // The seed override changes the bytes, and the output loads as a dataset.
  opts.has_seed = true;
  opts.seed = 10;
  opts.out_dir = dir.file("c");
  REQUIRE(run_cmd(ocn::cmd_synth, opts).code == 0);
  REQUIRE(read_file(dir.file("a") + "/train.json") != read_file(dir.file("c") + "/train.json"));

  ocn::Vocabulary vocab;
  const std::vector<ocn::Example> reloaded =
      ocn::load_race_path(dir.file("a") + "/train.json", vocab, true, 4);
  REQUIRE(reloaded.size() == 12);
}

TEST_CASE("the installed binary maps outcomes to exit codes") {
  TempDir dir("ocn_cli_binary");
  write_file(dir.file("gc.json"), gradcheck_config().dump());

  REQUIRE(run_binary("") == 2);                      // missing subcommand
  REQUIRE(run_binary("train") == 2);                 // missing --config
  REQUIRE(run_binary("no-such-verb") == 2);          // unknown subcommand
  REQUIRE(run_binary("gradcheck --config " + dir.file("gc.json")) == 0);
  REQUIRE(run_binary("gradcheck --config " + dir.file("gc.json") + " --inject-fault") == 1);
  REQUIRE(run_binary("eval --checkpoint /no/such.ckpt --data /no/such.json") == 2);
}
