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

// Online policy-gradient learning of the reward-bonus parameters.
//
// The agent samples actions from the softmax over UCT's root values. The
// score-function gradient grad log mu(a_t | s_t) is obtained from the plan's
// RewardTape: each internal-reward evaluation (i, h) receives the
// sensitivity
//
//   delta(i, h) = sum_b (1[a_t = b] - mu(b)) * I_i(b) / n(b) * gamma^h / T
//
// and backprop through the bonus network turns those into a parameter
// gradient. GARB (GPOMDP with an average-reward baseline) accumulates
//
//   e <- beta * e + grad log mu,    g <- g + (r_t - b) * e
//
// over the episode, and g drives one ADAM ascent step at episode end.

#ifndef PGRD_LEARNER_H_
#define PGRD_LEARNER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pgrd/bonusnet.h"
#include "pgrd/envsim.h"
#include "pgrd/uct.h"

namespace pgrd {

// How the reward baseline b tracks r_t.
enum class BaselineMode {
  kCumulativeMean,  // mean of every reward seen since training began
  kExponential,     // b <- b + rate * (r - b)
};

struct GarbState {
  ParamVector trace;        // e
  ParamVector accumulator;  // g
  double baseline = 0.0;    // b
  std::int64_t rewards_seen = 0;
  double beta = 0.99;
  BaselineMode baseline_mode = BaselineMode::kCumulativeMean;
  double baseline_rate = 0.01;
  int episode_steps = 0;

  GarbState() = default;
  GarbState(std::size_t num_params, double beta_value)
      : trace(num_params), accumulator(num_params), beta(beta_value) {}

  // Zeroes e and g; the baseline carries over between episodes.
  void BeginEpisode();
};

struct AdamState {
  ParamVector m;
  ParamVector v;
  std::int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t num_params) : m(num_params), v(num_params) {}
};

struct TrainConfig {
  double learning_rate = 1e-4;
  int halving_period = 1000;  // episodes
  double beta = 0.99;
  int max_episodes = 5000;
  std::int64_t max_total_steps = 1'000'000;
  // Episode step cap T, in decisions.
  int episode_step_cap = 10000;
  double temperature = 1.0;
  BaselineMode baseline_mode = BaselineMode::kCumulativeMean;
  double baseline_rate = 0.01;

  // Throws ConfigError.
  void Validate() const;
};

// delta(i, h) for every tape entry, in tape order.
std::vector<double> RewardSensitivities(const RewardTape& tape, ActionId chosen,
                                        std::span<const double> policy,
                                        double temperature = 1.0);

// sum_(i,h) delta(i,h) * d R_I(s_h^i, a_h^i) / d theta. Entries that share an
// observation are folded into a single backward pass.
ParamVector LogPolicyGradient(const NetworkSpec& net, const ParamVector& theta,
                              const RewardTape& tape,
                              std::span<const double> sensitivities);

// One GARB step with objective reward r. Uses the baseline from before r is
// folded into it.
void GarbStep(GarbState& state, const ParamVector& grad_log_mu, double reward);

// ADAM ascent on theta with gradient estimate g, then resets e and g.
// Returns false (and leaves theta and the moments untouched) when g has
// non-finite entries.
bool EndEpisodeUpdate(ParamVector& theta, GarbState& garb, AdamState& adam,
                      double learning_rate);

// initial * 2^-floor(episode / halving_period)
double LearningRateAt(int episode, const TrainConfig& config);

struct TrainLogRow {
  int episode = 0;
  int steps = 0;
  double objective_return = 0.0;  // u(h_T), clipped rewards
  std::int64_t raw_score = 0;     // unclipped score gained in the episode
  double baseline = 0.0;
  double learning_rate = 0.0;
  double grad_norm = 0.0;
  double wall_ms = 0.0;
  bool update_applied = true;
};

struct TrainResult {
  ParamVector theta;
  std::vector<TrainLogRow> log;
  std::int64_t total_steps = 0;
};

struct TrainSeeds {
  std::uint64_t env = 1;
  std::uint64_t planner = 2;
  std::uint64_t policy = 3;
};

using EpisodeCallback =
    std::function<void(const TrainLogRow& row, const ParamVector& theta)>;

// Runs episodes until max_episodes or max_total_steps, whichever comes first.
// A lost life ends a training episode.
TrainResult Train(const Environment& env, const NetworkSpec& net,
                  const MeanImage& mean_image, ParamVector theta,
                  const PlannerParams& planner_params, const TrainConfig& config,
                  const TrainSeeds& seeds,
                  const EpisodeCallback& on_episode = nullptr);

}  // namespace pgrd

#endif  // PGRD_LEARNER_H_
