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

#include "pgrd/harness.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "pgrd/oracles.h"

namespace pgrd {
namespace {

using nlohmann::json;

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Reads `key` from `obj` into `value` if present, recording it as consumed.
template <typename T>
void Read(const json& obj, const char* key, T& value,
          std::vector<std::string>& seen) {
  seen.emplace_back(key);
  if (!obj.contains(key)) return;
  try {
    value = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void RejectUnknown(const json& obj, const std::vector<std::string>& seen,
                   const std::string& section) {
  for (const auto& item : obj.items()) {
    if (std::find(seen.begin(), seen.end(), item.key()) == seen.end()) {
      throw ConfigError("unknown config key '" + section + item.key() + "'");
    }
  }
}

const json& Section(const json& root, const char* key,
                    std::vector<std::string>& seen) {
  static const json kEmpty = json::object();
  seen.emplace_back(key);
  if (!root.contains(key)) return kEmpty;
  const json& s = root.at(key);
  if (!s.is_object()) throw ConfigError(std::string("config section '") + key +
                                        "' must be an object");
  return s;
}

std::string_view BaselineName(BaselineMode mode) {
  return mode == BaselineMode::kCumulativeMean ? "cumulative" : "exponential";
}

BaselineMode ParseBaseline(std::string_view name) {
  if (name == "cumulative") return BaselineMode::kCumulativeMean;
  if (name == "exponential") return BaselineMode::kExponential;
  throw ConfigError("unknown baseline mode '" + std::string(name) + "'");
}

double Ratio(double num, double den) {
  if (den == 0.0) {
    if (num == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return num > 0 ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
  }
  return num / den;
}

std::ofstream OpenOutput(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::string_view ModeName(Mode mode) {
  switch (mode) {
    case Mode::kTrain:
      return "train";
    case Mode::kEval:
      return "eval";
    case Mode::kCompare:
      return "compare";
    case Mode::kGradcheck:
      return "gradcheck";
  }
  return "unknown";
}

Mode ParseMode(std::string_view name) {
  if (name == "train") return Mode::kTrain;
  if (name == "eval") return Mode::kEval;
  if (name == "compare") return Mode::kCompare;
  if (name == "gradcheck") return Mode::kGradcheck;
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

ExperimentConfig ParseConfig(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig c;
  std::vector<std::string> seen;
  Read(root, "version", c.version, seen);
  if (c.version != kConfigVersion) {
    throw ConfigError("unsupported config version " + std::to_string(c.version));
  }
  std::string mode(ModeName(c.mode));
  Read(root, "mode", mode, seen);
  c.mode = ParseMode(mode);
  Read(root, "seed", c.seed, seen);
  Read(root, "output_dir", c.output_dir, seen);
  Read(root, "checkpoint", c.checkpoint, seen);
  Read(root, "mean_image_games", c.mean_image_games, seen);

  {
    const json& s = Section(root, "env", seen);
    std::vector<std::string> keys;
    std::string family(EnvFamilyName(c.env.family));
    Read(s, "family", family, keys);
    c.env.family = ParseEnvFamily(family);
    Read(s, "length", c.env.length, keys);
    Read(s, "goal_score", c.env.goal_score, keys);
    Read(s, "width", c.env.width, keys);
    Read(s, "height", c.env.height, keys);
    Read(s, "num_traps", c.env.num_traps, keys);
    Read(s, "lives", c.env.lives, keys);
    Read(s, "num_states", c.env.num_states, keys);
    Read(s, "stochastic", c.env.stochastic, keys);
    Read(s, "terminal_state", c.env.terminal_state, keys);
    Read(s, "num_actions", c.env.num_actions, keys);
    Read(s, "time_limit", c.env.time_limit, keys);
    Read(s, "frame_skip", c.env.frame_skip, keys);
    Read(s, "frame_stack", c.env.frame_stack, keys);
    Read(s, "seed", c.env.seed, keys);
    RejectUnknown(s, keys, "env.");
  }
  {
    const json& s = Section(root, "planner", seen);
    std::vector<std::string> keys;
    Read(s, "n_trajectories", c.planner.n_trajectories, keys);
    Read(s, "max_depth", c.planner.max_depth, keys);
    Read(s, "exploration", c.planner.exploration, keys);
    Read(s, "gamma", c.planner.gamma, keys);
    RejectUnknown(s, keys, "planner.");
  }
  {
    const json& s = Section(root, "network", seen);
    std::vector<std::string> keys;
    Read(s, "hidden", c.network_hidden, keys);
    RejectUnknown(s, keys, "network.");
  }
  {
    const json& s = Section(root, "train", seen);
    std::vector<std::string> keys;
    Read(s, "learning_rate", c.train.learning_rate, keys);
    Read(s, "halving_period", c.train.halving_period, keys);
    Read(s, "beta", c.train.beta, keys);
    Read(s, "max_episodes", c.train.max_episodes, keys);
    Read(s, "max_total_steps", c.train.max_total_steps, keys);
    Read(s, "episode_step_cap", c.train.episode_step_cap, keys);
    Read(s, "temperature", c.train.temperature, keys);
    std::string baseline(BaselineName(c.train.baseline_mode));
    Read(s, "baseline", baseline, keys);
    c.train.baseline_mode = ParseBaseline(baseline);
    Read(s, "baseline_rate", c.train.baseline_rate, keys);
    Read(s, "checkpoint_every", c.checkpoint_every, keys);
    Read(s, "eval_every", c.eval_every, keys);
    Read(s, "record_wall_time", c.record_wall_time, keys);
    RejectUnknown(s, keys, "train.");
  }
  {
    const json& s = Section(root, "eval", seen);
    std::vector<std::string> keys;
    Read(s, "games", c.eval_games, keys);
    Read(s, "max_steps", c.max_eval_steps, keys);
    RejectUnknown(s, keys, "eval.");
  }
  RejectUnknown(root, seen, "");
  ValidateConfig(c);
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str());
}

std::string ConfigToJson(const ExperimentConfig& c) {
  json root = {
      {"version", c.version},
      {"mode", ModeName(c.mode)},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"checkpoint", c.checkpoint},
      {"mean_image_games", c.mean_image_games},
      {"env",
       {{"family", EnvFamilyName(c.env.family)},
        {"length", c.env.length},
        {"goal_score", c.env.goal_score},
        {"width", c.env.width},
        {"height", c.env.height},
        {"num_traps", c.env.num_traps},
        {"lives", c.env.lives},
        {"num_states", c.env.num_states},
        {"stochastic", c.env.stochastic},
        {"terminal_state", c.env.terminal_state},
        {"num_actions", c.env.num_actions},
        {"time_limit", c.env.time_limit},
        {"frame_skip", c.env.frame_skip},
        {"frame_stack", c.env.frame_stack},
        {"seed", c.env.seed}}},
      {"planner",
       {{"n_trajectories", c.planner.n_trajectories},
        {"max_depth", c.planner.max_depth},
        {"exploration", c.planner.exploration},
        {"gamma", c.planner.gamma}}},
      {"network", {{"hidden", c.network_hidden}}},
      {"train",
       {{"learning_rate", c.train.learning_rate},
        {"halving_period", c.train.halving_period},
        {"beta", c.train.beta},
        {"max_episodes", c.train.max_episodes},
        {"max_total_steps", c.train.max_total_steps},
        {"episode_step_cap", c.train.episode_step_cap},
        {"temperature", c.train.temperature},
        {"baseline", BaselineName(c.train.baseline_mode)},
        {"baseline_rate", c.train.baseline_rate},
        {"checkpoint_every", c.checkpoint_every},
        {"eval_every", c.eval_every},
        {"record_wall_time", c.record_wall_time}}},
      {"eval", {{"games", c.eval_games}, {"max_steps", c.max_eval_steps}}},
  };
  return root.dump(2);
}

void ValidateConfig(const ExperimentConfig& c) {
  c.env.Validate();
  c.planner.Validate();
  c.train.Validate();
  if (c.eval_games < 1) throw ConfigError("eval.games must be >= 1");
  if (c.max_eval_steps < 1) throw ConfigError("eval.max_steps must be >= 1");
  if (c.mean_image_games < 1) throw ConfigError("mean_image_games must be >= 1");
  if (c.checkpoint_every < 0 || c.eval_every < 0) {
    throw ConfigError("checkpoint_every and eval_every must be >= 0");
  }
  if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  // Shape-checks the network against the environment's frames.
  BuildNetwork(c, Environment(c.env));
}

NetworkSpec BuildNetwork(const ExperimentConfig& config, const Environment& env) {
  std::string descriptor = config.network_hidden;
  if (!descriptor.empty()) descriptor += ',';
  descriptor += "dense:" + std::to_string(env.num_actions());
  return NetworkSpec::Parse(descriptor, Shape3{env.spec().frame_stack,
                                               env.frame_height(),
                                               env.frame_width()});
}

MeanImage BuildMeanImage(const ExperimentConfig& config, const Environment& env) {
  Rng rng(DeriveSeed(config.seed, "mean-image"));
  return ComputeMeanImage(env, config.mean_image_games, rng,
                          config.max_eval_steps);
}

EvalReport SummarizeScores(std::vector<std::int64_t> scores) {
  EvalReport report;
  report.n_games = static_cast<int>(scores.size());
  if (scores.empty()) return report;
  double sum = 0.0;
  for (auto s : scores) sum += static_cast<double>(s);
  report.mean = sum / report.n_games;
  if (report.n_games > 1) {
    double ss = 0.0;
    for (auto s : scores) ss += (s - report.mean) * (s - report.mean);
    report.std_error = std::sqrt(ss / (report.n_games - 1)) / std::sqrt(report.n_games);
  }
  report.scores = std::move(scores);
  return report;
}

EvalReport Evaluate(const Environment& env, const PlannerParams& planner_params,
                    const BonusModel& bonus, int n_games, std::uint64_t seed,
                    int max_steps) {
  const bool with_bonus = bonus.theta != nullptr;
  std::optional<Planner> planner;
  if (with_bonus) {
    if (bonus.net == nullptr || bonus.mean_image == nullptr) {
      throw UsageError("Evaluate: bonus model needs a network and a mean image");
    }
    planner.emplace(env, planner_params, *bonus.net, *bonus.mean_image);
  } else {
    planner.emplace(env, planner_params);
  }
  std::vector<std::int64_t> scores;
  for (int game = 0; game < n_games; ++game) {
    Rng planner_rng(DeriveSeed(seed, "eval-planner", game));
    Rng tie_rng(DeriveSeed(seed, "eval-tiebreak", game));
    SimState state = env.Reset(DeriveSeed(seed, "eval-env", game));
    FrameHistory history(env.spec().frame_stack);
    if (with_bonus) history.Push(env.Render(state), state.Hash());
    for (int t = 0; t < max_steps && !state.game_over; ++t) {
      const PlanResult plan = planner->Plan(state, history, bonus.theta, planner_rng);
      const ActionId action = SelectGreedy(plan.root_q, tie_rng);
      state = env.Step(state, action).next_state;
      if (with_bonus) history.Push(env.Render(state), state.Hash());
    }
    scores.push_back(state.score);
  }
  return SummarizeScores(std::move(scores));
}

CompareReport Compare(const ExperimentConfig& config, const Environment& env,
                      const Checkpoint& checkpoint) {
  const NetworkSpec expected = BuildNetwork(config, env);
  if (!(checkpoint.spec == expected)) {
    throw ConfigError("checkpoint network '" + checkpoint.spec.Descriptor() +
                      "' does not match the configured network '" +
                      expected.Descriptor() + "'");
  }
  const MeanImage mean = BuildMeanImage(config, env);
  CompareReport report;
  auto run_arm = [&](ArmResult& arm, std::string name, PlannerParams params,
                     bool use_bonus) {
    arm.name = std::move(name);
    arm.planner = params;
    arm.uses_bonus = use_bonus;
    BonusModel model;
    if (use_bonus) model = {&checkpoint.spec, &checkpoint.params, &mean};
    arm.report = Evaluate(env, params, model, config.eval_games, config.seed,
                          config.max_eval_steps);
  };
  PlannerParams deeper = config.planner;
  deeper.max_depth *= 2;
  PlannerParams wider = config.planner;
  wider.n_trajectories *= 2;
  run_arm(report.objective, "R_O", config.planner, false);
  run_arm(report.internal, "R_I", config.planner, true);
  run_arm(report.deeper, "R_O_deeper", deeper, false);
  run_arm(report.wider, "R_O_wider", wider, false);
  report.internal_over_objective =
      Ratio(report.internal.report.mean, report.objective.report.mean);
  report.internal_over_best_baseline =
      Ratio(report.internal.report.mean,
            std::max(report.deeper.report.mean, report.wider.report.mean));
  return report;
}

void WriteScoresCsv(std::ostream& out, const EvalReport& report) {
  out << "game,score\n";
  for (std::size_t g = 0; g < report.scores.size(); ++g) {
    out << g << ',' << report.scores[g] << '\n';
  }
}

void WriteCompareCsv(std::ostream& out, const CompareReport& r) {
  out << "arm,depth,trajectories,uses_bonus,n_games,mean,stderr,"
         "ri_over_ro,ri_over_max_deeper_wider\n";
  const std::string ratio1 = FormatDouble(r.internal_over_objective);
  const std::string ratio2 = FormatDouble(r.internal_over_best_baseline);
  for (const ArmResult* arm : {&r.objective, &r.internal, &r.deeper, &r.wider}) {
    out << arm->name << ',' << arm->planner.max_depth << ','
        << arm->planner.n_trajectories << ',' << (arm->uses_bonus ? 1 : 0) << ','
        << arm->report.n_games << ',' << FormatDouble(arm->report.mean) << ','
        << FormatDouble(arm->report.std_error) << ',' << ratio1 << ',' << ratio2
        << '\n';
  }
}

void WriteTrainLogHeader(std::ostream& out) {
  out << "episode,steps,u_hT,baseline_b,lr,grad_norm,wall_ms,raw_score\n";
}

void WriteTrainLogRow(std::ostream& out, const TrainLogRow& row,
                      bool record_wall_time) {
  out << row.episode << ',' << row.steps << ',' << FormatDouble(row.objective_return)
      << ',' << FormatDouble(row.baseline) << ',' << FormatDouble(row.learning_rate)
      << ',' << (row.update_applied ? FormatDouble(row.grad_norm) : "nan") << ','
      << (record_wall_time ? FormatDouble(row.wall_ms) : "0") << ','
      << row.raw_score << '\n';
}

GradcheckSummary RunGradcheck(std::uint64_t seed, int instances) {
  GradcheckSummary summary;
  Rng rng(DeriveSeed(seed, "gradcheck"));
  for (int n = 0; n < instances; ++n) {
    const int num_actions = 2 + static_cast<int>(rng.Index(3));
    const NetworkSpec net = oracles::RandomSmallNetwork(rng, num_actions);
    const ParamVector theta = oracles::RandomParams(net, rng);
    const RewardTape tape =
        oracles::SyntheticTape(net, theta, num_actions, 50, 0.9, rng);
    const RootValues q = RootQFromTape(tape, net, theta);
    const std::vector<double> mu = SoftmaxPolicy(q);
    const ActionId chosen = tape.root_actions[rng.Index(tape.root_actions.size())];
    const ParamVector analytic = LogPolicyGradient(
        net, theta, tape, RewardSensitivities(tape, chosen, mu));
    const ParamVector numeric =
        oracles::FdLogPolicyGrad(net, tape, theta, chosen, 1e-5);
    summary.max_policy_grad_error = std::max(
        summary.max_policy_grad_error,
        oracles::RelativeError(analytic.span(), numeric.span()));

    const Observation& obs = tape.observations.front();
    std::vector<double> out_grad(num_actions);
    for (double& g : out_grad) g = rng.Normal(0.0, 1.0);
    const ParamVector back =
        Backward(net, theta, tape.caches.front(), out_grad);
    const ParamVector fd = oracles::FdNetworkGrad(net, theta, obs, out_grad, 1e-5);
    summary.max_backward_error = std::max(
        summary.max_backward_error, oracles::RelativeError(back.span(), fd.span()));
    ++summary.instances;
  }
  summary.passed =
      summary.max_policy_grad_error <= 1e-5 && summary.max_backward_error <= 1e-6;
  return summary;
}

namespace {

int RunTrain(const ExperimentConfig& config, const Environment& env,
             const std::filesystem::path& dir, std::ostream& out) {
  const NetworkSpec net = BuildNetwork(config, env);
  const MeanImage mean = BuildMeanImage(config, env);
  Rng init_rng(DeriveSeed(config.seed, "init"));
  ParamVector theta = InitParams(net, init_rng);
  const TrainSeeds seeds{DeriveSeed(config.seed, "env"),
                         DeriveSeed(config.seed, "planner"),
                         DeriveSeed(config.seed, "policy")};

  std::ofstream log = OpenOutput(dir / "train_log.csv");
  WriteTrainLogHeader(log);
  std::ofstream periodic;
  if (config.eval_every > 0) {
    periodic = OpenOutput(dir / "periodic_eval.csv");
    periodic << "episode,n_games,mean,stderr\n";
  }
  int skipped = 0;
  auto on_episode = [&](const TrainLogRow& row, const ParamVector& theta_now) {
    WriteTrainLogRow(log, row, config.record_wall_time);
    if (!row.update_applied) ++skipped;
    const int done = row.episode + 1;
    if (config.checkpoint_every > 0 && done % config.checkpoint_every == 0) {
      SaveCheckpoint((dir / ("checkpoint_" + std::to_string(done) + ".ckpt")).string(),
                     net, theta_now);
    }
    if (config.eval_every > 0 && done % config.eval_every == 0) {
      const EvalReport r =
          Evaluate(env, config.planner, {&net, &theta_now, &mean},
                   config.eval_games, config.seed, config.max_eval_steps);
      periodic << done << ',' << r.n_games << ',' << FormatDouble(r.mean) << ','
               << FormatDouble(r.std_error) << '\n';
    }
  };
  const TrainResult result = Train(env, net, mean, std::move(theta), config.planner,
                                   config.train, seeds, on_episode);
  SaveCheckpoint((dir / "final.ckpt").string(), net, result.theta);
  out << "trained " << result.log.size() << " episodes, " << result.total_steps
      << " steps; checkpoint " << (dir / "final.ckpt").string() << '\n';
  if (!result.theta.AllFinite()) return kExitNumericalError;
  if (skipped > 0) {
    out << skipped << " episode updates skipped on non-finite gradients\n";
  }
  return kExitOk;
}

int RunEval(const ExperimentConfig& config, const Environment& env,
            const std::filesystem::path& dir, std::ostream& out) {
  EvalReport report;
  if (config.checkpoint.empty()) {
    report = Evaluate(env, config.planner, {}, config.eval_games, config.seed,
                      config.max_eval_steps);
  } else {
    const Checkpoint ckpt = LoadCheckpoint(config.checkpoint);
    if (!(ckpt.spec == BuildNetwork(config, env))) {
      throw ConfigError("checkpoint network does not match the configured network");
    }
    if (!ckpt.params.AllFinite()) throw NumericalError("checkpoint has non-finite parameters");
    const MeanImage mean = BuildMeanImage(config, env);
    report = Evaluate(env, config.planner, {&ckpt.spec, &ckpt.params, &mean},
                      config.eval_games, config.seed, config.max_eval_steps);
  }
  std::ofstream csv = OpenOutput(dir / "eval.csv");
  WriteScoresCsv(csv, report);
  out << FormatDouble(report.mean) << " (" << FormatDouble(report.std_error)
      << ") over " << report.n_games << " games\n";
  return kExitOk;
}

int RunCompare(const ExperimentConfig& config, const Environment& env,
               const std::filesystem::path& dir, std::ostream& out) {
  if (config.checkpoint.empty()) {
    throw ConfigError("compare needs a trained checkpoint (--checkpoint)");
  }
  const Checkpoint ckpt = LoadCheckpoint(config.checkpoint);
  const CompareReport report = Compare(config, env, ckpt);
  for (const ArmResult* arm :
       {&report.objective, &report.internal, &report.deeper, &report.wider}) {
    std::ofstream csv = OpenOutput(dir / ("arm_" + arm->name + ".csv"));
    WriteScoresCsv(csv, arm->report);
  }
  std::ofstream csv = OpenOutput(dir / "ratio.csv");
  WriteCompareCsv(csv, report);
  WriteCompareCsv(out, report);
  return kExitOk;
}

}  // namespace

int DumpFirstPlan(const ExperimentConfig& config, const std::string& path,
                  std::ostream& err) {
  try {
    const Environment env(config.env);
    const SimState root = env.Reset(DeriveSeed(config.seed, "eval-env", 0));
    Rng rng(DeriveSeed(config.seed, "eval-planner", 0));
    FrameHistory history(env.spec().frame_stack);
    history.Push(env.Render(root), root.Hash());
    PlanResult plan;
    if (config.checkpoint.empty()) {
      plan = Planner(env, config.planner).Plan(root, history, nullptr, rng);
    } else {
      const Checkpoint ckpt = LoadCheckpoint(config.checkpoint);
      const Planner planner(env, config.planner, ckpt.spec,
                            BuildMeanImage(config, env));
      plan = planner.Plan(root, history, &ckpt.params, rng);
    }
    std::ofstream out = OpenOutput(path);
    DumpPlan(out, plan);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}

int Run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    ValidateConfig(config);
    if (config.mode == Mode::kGradcheck) {
      const GradcheckSummary s = RunGradcheck(config.seed, 5);
      out << "policy gradient vs finite differences: max rel err "
          << FormatDouble(s.max_policy_grad_error) << " (tol 1e-5)\n"
          << "network backward vs finite differences: max rel err "
          << FormatDouble(s.max_backward_error) << " (tol 1e-6)\n"
          << (s.passed ? "PASS" : "FAIL") << '\n';
      return s.passed ? kExitOk : kExitNumericalError;
    }
    const Environment env(config.env);
    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    {
      std::ofstream echo = OpenOutput(dir / "config.json");
      echo << ConfigToJson(config) << '\n';
    }
    switch (config.mode) {
      case Mode::kTrain:
        return RunTrain(config, env, dir, out);
      case Mode::kEval:
        return RunEval(config, env, dir, out);
      case Mode::kCompare:
        return RunCompare(config, env, dir, out);
      case Mode::kGradcheck:
        break;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumericalError;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}

}  // namespace pgrd
