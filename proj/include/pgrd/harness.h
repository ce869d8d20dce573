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

// Experiment orchestration: config files, training runs, greedy evaluation
// and the four-arm planner comparison.

#ifndef PGRD_HARNESS_H_
#define PGRD_HARNESS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pgrd/bonusnet.h"
#include "pgrd/envsim.h"
#include "pgrd/learner.h"
#include "pgrd/uct.h"

namespace pgrd {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitRuntimeError = 3,
  kExitNumericalError = 4,
};

enum class Mode { kTrain, kEval, kCompare, kGradcheck };

std::string_view ModeName(Mode mode);
Mode ParseMode(std::string_view name);

inline constexpr int kConfigVersion = 1;

struct ExperimentConfig {
  int version = kConfigVersion;
  Mode mode = Mode::kTrain;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  // Trained parameters for eval and compare.
  std::string checkpoint;

  EnvSpec env;
  PlannerParams planner;
  // Hidden layers; the dense output layer (one unit per action) is appended.
  std::string network_hidden = "conv:8x1x3/1,relu";
  TrainConfig train;

  int checkpoint_every = 0;  // episodes; 0 disables
  // Periodic greedy evaluation during training; extra instrumentation.
  int eval_every = 0;
  bool record_wall_time = false;

  int eval_games = 20;
  int max_eval_steps = 10000;
  int mean_image_games = 10;
};

// Throws ConfigError on malformed input, unknown keys or bad values.
ExperimentConfig ParseConfig(std::string_view json_text);
ExperimentConfig LoadConfig(const std::string& path);
std::string ConfigToJson(const ExperimentConfig& config);
void ValidateConfig(const ExperimentConfig& config);

NetworkSpec BuildNetwork(const ExperimentConfig& config, const Environment& env);
MeanImage BuildMeanImage(const ExperimentConfig& config, const Environment& env);

struct EvalReport {
  std::vector<std::int64_t> scores;
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(n_games)
  int n_games = 0;
};

EvalReport SummarizeScores(std::vector<std::int64_t> scores);

// The bonus network and its parameters; absent for objective-reward UCT.
struct BonusModel {
  const NetworkSpec* net = nullptr;
  const ParamVector* theta = nullptr;
  const MeanImage* mean_image = nullptr;
};

// Full games (only game over is terminal) with the greedy root action and
// fixed parameters. Raw, unclipped scores.
EvalReport Evaluate(const Environment& env, const PlannerParams& planner,
                    const BonusModel& bonus, int n_games, std::uint64_t seed,
                    int max_steps = 10000);

struct ArmResult {
  std::string name;
  PlannerParams planner;
  bool uses_bonus = false;
  EvalReport report;
};

struct CompareReport {
  ArmResult objective;  // R_O, base depth and width
  ArmResult internal;   // R_I, base depth and width
  ArmResult deeper;     // R_O, twice the depth
  ArmResult wider;      // R_O, twice the trajectories
  double internal_over_objective = 0.0;
  double internal_over_best_baseline = 0.0;
};

CompareReport Compare(const ExperimentConfig& config, const Environment& env,
                      const Checkpoint& checkpoint);

void WriteScoresCsv(std::ostream& out, const EvalReport& report);
void WriteCompareCsv(std::ostream& out, const CompareReport& report);
void WriteTrainLogHeader(std::ostream& out);
void WriteTrainLogRow(std::ostream& out, const TrainLogRow& row,
                      bool record_wall_time);

struct GradcheckSummary {
  double max_policy_grad_error = 0.0;
  double max_backward_error = 0.0;
  int instances = 0;
  bool passed = false;
};
GradcheckSummary RunGradcheck(std::uint64_t seed, int instances);

// Plans once from the initial state (with the checkpoint's bonus when
// config.checkpoint is set) and writes DumpPlan output to `path`.
int DumpFirstPlan(const ExperimentConfig& config, const std::string& path,
                  std::ostream& err);

// Dispatches on config.mode, writing artifacts under config.output_dir.
// Returns an ExitCode.
int Run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

}  // namespace pgrd

#endif  // PGRD_HARNESS_H_
