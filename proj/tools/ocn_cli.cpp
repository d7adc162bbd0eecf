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

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ocn/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Option Comparison Network: train, evaluate, predict, and check gradients"};
  app.require_subcommand(1);

  ocn::CliOptions opts;
  const auto add_common = [&opts](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON run configuration");
    sub->add_option("--checkpoint", opts.checkpoint_path, "checkpoint file");
    sub->add_option("--data", opts.data_path, "dataset file or directory");
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "seed override");
  };

  CLI::App* train = app.add_subcommand("train", "train a model from a config");
  CLI::App* eval = app.add_subcommand("eval", "report accuracy of a checkpoint on a dataset");
  CLI::App* predict = app.add_subcommand("predict", "per-question probabilities and letters");
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference check of every parameter group");
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic dataset");
  for (CLI::App* sub : {train, eval, predict, gradcheck, synth}) add_common(sub);
  gradcheck->add_flag("--inject-fault", opts.inject_fault,
                      "corrupt one gradient first (harness self-test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (CLI::App* sub : {train, eval, predict, gradcheck, synth}) {
    if (sub->parsed() && sub->count("--seed") > 0) opts.has_seed = true;
  }

  if (train->parsed()) return ocn::cmd_train(opts, std::cout, std::cerr);
  if (eval->parsed()) return ocn::cmd_eval(opts, std::cout, std::cerr);
  if (predict->parsed()) return ocn::cmd_predict(opts, std::cout, std::cerr);
  if (gradcheck->parsed()) return ocn::cmd_gradcheck(opts, std::cout, std::cerr);
  if (synth->parsed()) return ocn::cmd_synth(opts, std::cout, std::cerr);
  return 2;
}
