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

// Brute-force references for tests and the acceptance suite. Nothing here
// shares code with the planner's search loop or the learner's gradient path.

#ifndef PGRD_ORACLES_H_
#define PGRD_ORACLES_H_

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pgrd/bonusnet.h"
#include "pgrd/envsim.h"
#include "pgrd/uct.h"

namespace pgrd::oracles {

struct TabularMDP {
  int num_states = 0;
  int num_actions = 0;
  // transitions[s][a] = list of (next state, probability).
  std::vector<std::vector<std::vector<std::pair<int, double>>>> transitions;
  std::vector<std::vector<double>> rewards;
  // Entering a terminal state ends the episode.
  std::vector<bool> terminal;
  double gamma = 1.0;
};

// Clipped-reward view of a RandomMdp environment.
TabularMDP TabularFromEnvironment(const Environment& env, double gamma);

// q[d][s][a]: optimal value of taking a in s at depth d when the horizon
// ends after depth `horizon - 1`. Requires horizon >= 1.
using QTable = std::vector<std::vector<std::vector<double>>>;
QTable DpQ(const TabularMDP& mdp, int horizon);

// Central differences of log softmax(RootQFromTape(tape, theta)/T)[chosen],
// over all coordinates or over `coordinates` when given (others are zero).
ParamVector FdLogPolicyGrad(const NetworkSpec& net, const RewardTape& tape,
                            const ParamVector& theta, ActionId chosen,
                            double epsilon, double temperature = 1.0,
                            std::span<const std::size_t> coordinates = {});

// Central differences of dot(output_grad, Forward(theta, obs).bonus).
ParamVector FdNetworkGrad(const NetworkSpec& net, const ParamVector& theta,
                          const Observation& obs,
                          std::span<const double> output_grad, double epsilon);

// max_k |a_k - b_k| / max(max_k |a_k|, max_k |b_k|): error relative to the
// gradient's scale, so near-zero coordinates do not dominate. Zero when both
// vectors are zero.
double RelativeError(std::span<const double> a, std::span<const double> b);

// A single decision: depth-1 planning on a fixed observation, so the root
// value of each action is exactly bonus(obs)[a] + planning_reward[a].
struct OneStepProblem {
  NetworkSpec net;
  Observation obs;
  std::vector<double> planning_reward;  // clipped R_O the planner sees
  std::vector<double> expected_return;  // E[u | a]
  double temperature = 1.0;
};

struct PolicyValueGrad {
  double value = 0.0;
  ParamVector grad;
};

// U(theta) = sum_a mu(a) E[u | a] and its exact gradient. Throws ConfigError
// when the action space exceeds `max_actions`.
PolicyValueGrad EnumPolicyValueGrad(const OneStepProblem& problem,
                                    const ParamVector& theta,
                                    int max_actions = 64);

// Objective-reward UCT written independently of Planner, following the same
// documented random-draw protocol. Used to check that a zero bonus leaves
// the search unchanged.
struct PlainUctResult {
  std::vector<std::optional<double>> root_q;
  // (state hash, action) per step of each trajectory.
  std::vector<std::vector<std::pair<std::uint64_t, ActionId>>> trajectories;
  std::uint64_t rng_trace_id = 0;
};
PlainUctResult PlainUct(const Environment& env, const SimState& root,
                        const PlannerParams& params, Rng& rng);

// Random tape over random observations, for gradient checks without a
// planner. Bonuses are evaluated under `theta`.
RewardTape SyntheticTape(const NetworkSpec& net, const ParamVector& theta,
                         int num_actions, int max_entries, double gamma,
                         Rng& rng);

// Random conv/dense/rectifier network with at most `max_params` parameters,
// on a small random input shape.
NetworkSpec RandomSmallNetwork(Rng& rng, int num_actions,
                               std::size_t max_params = 2000);

// Parameters with every entry nonzero (unlike InitParams, whose output layer
// and biases are zero), so gradient checks exercise every layer.
ParamVector RandomParams(const NetworkSpec& net, Rng& rng);

}  // namespace pgrd::oracles

#endif  // PGRD_ORACLES_H_
