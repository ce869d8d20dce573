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

// UCT over (state, depth) nodes, planning with the internal reward
//
//   R_I(s, a) = bonus(obs(s))[a] + R_O(s, a).
//
// Node values are plain averages of the discounted returns that followed
// each (s, a, d) in the sampled trajectories. Alongside the tree, Plan()
// records a RewardTape: every internal-reward evaluation with its
// (trajectory, depth) coordinates and each trajectory's root action. The
// tape is what the learner differentiates: holding trajectory membership and
// visit counts fixed, the root values are linear in the tape's rewards.
//
// Random draws (shared with any reference implementation that wants to
// replay a search):
//   * a node with untried actions picks uniformly among them, listed in
//     ascending order, with one Rng::Index draw;
//   * otherwise the UCB maximizer is taken; exact ties cost one Index draw
//     over the tied actions in ascending order, a unique maximizer costs none.

#ifndef PGRD_UCT_H_
#define PGRD_UCT_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "pgrd/bonusnet.h"
#include "pgrd/common.h"
#include "pgrd/envsim.h"

namespace pgrd {

struct PlannerParams {
  int n_trajectories = 100;
  // In agent decisions. 100 arcade frames at frame skip 4 is 25 decisions.
  int max_depth = 25;
  double exploration = 0.1;
  double gamma = 0.99;

  // Throws ConfigError.
  void Validate() const;
};

struct NodeKey {
  std::uint64_t state_hash = 0;
  int depth = 0;
  bool operator==(const NodeKey&) const = default;
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& key) const {
    return static_cast<std::size_t>(
        HashCombine(key.state_hash, static_cast<std::uint64_t>(key.depth)));
  }
};

struct NodeStats {
  int visits = 0;                  // n(s, d)
  std::vector<int> action_visits;  // n(s, a, d)
  std::vector<double> return_sum;  // sum of returns following (s, a, d)

  explicit NodeStats(int num_actions = 0)
      : action_visits(num_actions, 0), return_sum(num_actions, 0.0) {}
  double Q(ActionId a) const { return return_sum[a] / action_visits[a]; }
};

using SearchTree = std::unordered_map<NodeKey, NodeStats, NodeKeyHash>;

struct TapeEntry {
  int trajectory = 0;
  int depth = 0;
  std::uint64_t state_hash = 0;
  ActionId action = 0;
  // Index into RewardTape::observations; -1 when planning without a bonus.
  int eval_index = -1;
  double bonus = 0.0;
  double objective_reward = 0.0;

  double internal_reward() const { return bonus + objective_reward; }
};

struct RewardTape {
  double gamma = 1.0;
  int num_actions = 0;
  // Ordered by trajectory, then depth.
  std::vector<TapeEntry> entries;
  // First action of each trajectory; I_i(s_root, b, 0) = [root_actions[i] == b].
  std::vector<ActionId> root_actions;
  // n(s_root, b, 0).
  std::vector<int> root_counts;
  // Distinct network inputs seen while planning, with the forward caches
  // computed under the planning parameters.
  std::vector<Observation> observations;
  std::vector<ForwardCache> caches;

  int num_trajectories() const { return static_cast<int>(root_actions.size()); }
};

// Entry b is empty when root action b was never simulated.
using RootValues = std::vector<std::optional<double>>;

struct PlanResult {
  RootValues root_q;
  RewardTape tape;
  SearchTree tree;
  // Hash of every random draw the search made.
  std::uint64_t rng_trace_id = 0;
};

double InternalReward(double bonus, double objective_reward);

// Q(s,a,d) + c * sqrt(ln n(s,d) / n(s,a,d)). Requires n(s,a,d) > 0.
double UcbScore(const NodeStats& node, ActionId a, double exploration);

class Planner {
 public:
  Planner(const Environment& env, PlannerParams params);
  // Planning with a reward bonus.
  Planner(const Environment& env, PlannerParams params, const NetworkSpec& net,
          MeanImage mean_image);

  const PlannerParams& params() const { return params_; }
  bool has_bonus() const { return net_.has_value(); }

  // Runs exactly n_trajectories simulations from `root`. `theta` may be null
  // (objective reward only) and must be non-null when has_bonus(). `history`
  // holds the frames up to and including the root state's frame.
  PlanResult Plan(const SimState& root, const FrameHistory& history,
                  const ParamVector* theta, Rng& rng) const;

 private:
  const Environment& env_;
  PlannerParams params_;
  std::optional<NetworkSpec> net_;
  MeanImage mean_image_;
};

// exp(Q(b) / T) / sum exp(Q(.) / T) over visited actions; unvisited actions
// get probability zero. Throws UsageError if nothing was visited.
std::vector<double> SoftmaxPolicy(const RootValues& root_q,
                                  double temperature = 1.0);

// Argmax over visited actions, ties broken uniformly.
ActionId SelectGreedy(const RootValues& root_q, Rng& rng);

ActionId SampleAction(std::span<const double> probabilities, Rng& rng);

// Root values recomputed from the tape under `theta`, holding the tree
// (memberships, counts, objective rewards) fixed. With the planning
// parameters this reproduces PlanResult::root_q.
RootValues RootQFromTape(const RewardTape& tape, const NetworkSpec& net,
                         const ParamVector& theta);

// Line-delimited JSON dump of the tree and the tape, for inspection.
void DumpPlan(std::ostream& out, const PlanResult& plan);

}  // namespace pgrd

#endif  // PGRD_UCT_H_
