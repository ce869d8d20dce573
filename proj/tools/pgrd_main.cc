// Copyright 2026 The PGRD-DL Authors.
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

// pgrd train|eval|compare|gradcheck [--config FILE] [overrides...]

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pgrd/harness.h"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> checkpoint;
  std::optional<int> episodes;
  std::optional<int> games;
  std::optional<double> learning_rate;
  std::optional<int> depth;
  std::optional<int> trajectories;
};

void AddCommonFlags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "JSON experiment config");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--depth", o.depth, "planning depth (decisions)");
  cmd->add_option("--trajectories", o.trajectories, "trajectories per decision");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned reward bonuses for UCT planning"};
  app.require_subcommand(1);
  Overrides o;
  std::string dump_plan;

  auto* train = app.add_subcommand("train", "learn reward-bonus parameters");
  AddCommonFlags(train, o);
  train->add_option("--episodes", o.episodes, "maximum training episodes");
  train->add_option("--lr", o.learning_rate, "initial ADAM learning rate");

  auto* eval = app.add_subcommand("eval", "greedy evaluation games");
  AddCommonFlags(eval, o);
  eval->add_option("--checkpoint", o.checkpoint,
                   "trained parameters; omit for objective-reward UCT");
  eval->add_option("--games", o.games, "number of evaluation games");
  eval->add_option("--dump-plan", dump_plan,
                   "write the first decision's search tree and tape (JSON lines)");

  auto* compare = app.add_subcommand("compare", "four-arm planner comparison");
  AddCommonFlags(compare, o);
  compare->add_option("--checkpoint", o.checkpoint, "trained parameters")->required();
  compare->add_option("--games", o.games, "evaluation games per arm");

  auto* gradcheck = app.add_subcommand("gradcheck", "gradient oracle suite");
  gradcheck->add_option("--seed", o.seed, "master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? pgrd::kExitOk : pgrd::kExitConfigError;
  }

  pgrd::ExperimentConfig config;
  try {
    if (!o.config_path.empty()) config = pgrd::LoadConfig(o.config_path);
    const std::string name = app.get_subcommands().front()->get_name();
    config.mode = pgrd::ParseMode(name);
    if (o.seed) config.seed = *o.seed;
    if (o.out) config.output_dir = *o.out;
    if (o.checkpoint) config.checkpoint = *o.checkpoint;
    if (o.episodes) config.train.max_episodes = *o.episodes;
    if (o.games) config.eval_games = *o.games;
    if (o.learning_rate) config.train.learning_rate = *o.learning_rate;
    if (o.depth) config.planner.max_depth = *o.depth;
    if (o.trajectories) config.planner.n_trajectories = *o.trajectories;
    pgrd::ValidateConfig(config);
  } catch (const pgrd::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return pgrd::kExitConfigError;
  }

  if (!dump_plan.empty()) {
    const int status = pgrd::DumpFirstPlan(config, dump_plan, std::cerr);
    if (status != pgrd::kExitOk) return status;
  }
  return pgrd::Run(config, std::cout, std::cerr);
}
