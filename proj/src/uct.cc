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

#include "pgrd/uct.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "json.hpp"

namespace pgrd {
namespace {

// Index draw that also folds the draw into the plan's trace id.
std::size_t TracedIndex(Rng& rng, std::size_t n, std::uint64_t& trace) {
  const std::size_t pick = rng.Index(n);
  trace = HashCombine(HashCombine(trace, n), pick);
  return pick;
}

ActionId SelectAction(const NodeStats& node, double exploration, Rng& rng,
                      std::uint64_t& trace) {
  const int num_actions = static_cast<int>(node.action_visits.size());
  std::vector<ActionId> candidates;
  for (ActionId a = 0; a < num_actions; ++a) {
    if (node.action_visits[a] == 0) candidates.push_back(a);
  }
  if (candidates.empty()) {
    double best = -std::numeric_limits<double>::infinity();
    for (ActionId a = 0; a < num_actions; ++a) {
      const double score = UcbScore(node, a, exploration);
      if (score > best) {
        best = score;
        candidates.assign(1, a);
      } else if (score == best) {
        candidates.push_back(a);
      }
    }
  }
  if (candidates.size() == 1) return candidates.front();
  return candidates[TracedIndex(rng, candidates.size(), trace)];
}

}  // namespace

void PlannerParams::Validate() const {
  if (n_trajectories < 1) throw ConfigError("n_trajectories must be >= 1");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (!(exploration >= 0.0)) throw ConfigError("exploration must be >= 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0,1)");
}

double InternalReward(double bonus, double objective_reward) {
  return bonus + objective_reward;
}

double UcbScore(const NodeStats& node, ActionId a, double exploration) {
  const int n_sad = node.action_visits.at(a);
  if (n_sad <= 0) throw UsageError("UcbScore: action has no visits");
  return node.Q(a) +
         exploration * std::sqrt(std::log(static_cast<double>(node.visits)) / n_sad);
}

Planner::Planner(const Environment& env, PlannerParams params)
    : env_(env), params_(params) {
  params_.Validate();
}

Planner::Planner(const Environment& env, PlannerParams params,
                 const NetworkSpec& net, MeanImage mean_image)
    : env_(env), params_(params), net_(net), mean_image_(std::move(mean_image)) {
  params_.Validate();
  const Shape3 expected{env.spec().frame_stack, env.frame_height(),
                        env.frame_width()};
  if (!(net.input_shape() == expected)) {
    throw ConfigError("network input shape does not match the environment");
  }
  if (net.num_outputs() != env.num_actions()) {
    throw ConfigError("network must have one output per action");
  }
  if (mean_image_.height != env.frame_height() ||
      mean_image_.width != env.frame_width()) {
    throw ConfigError("mean image does not match the environment frames");
  }
}

PlanResult Planner::Plan(const SimState& root, const FrameHistory& history,
                         const ParamVector* theta, Rng& rng) const {
  if (root.game_over) throw UsageError("Plan: root state is terminal");
  if (has_bonus() != (theta != nullptr)) {
    throw UsageError("Plan: parameters must be given iff the planner has a bonus");
  }
  if (theta != nullptr && history.empty()) {
    throw UsageError("Plan: bonus planning needs the root frame history");
  }
  const int num_actions = env_.num_actions();
  const double gamma = params_.gamma;

  PlanResult result;
  RewardTape& tape = result.tape;
  tape.gamma = gamma;
  tape.num_actions = num_actions;
  tape.root_counts.assign(num_actions, 0);
  tape.root_actions.reserve(params_.n_trajectories);
  std::unordered_map<std::uint64_t, int> eval_of_key;
  std::vector<std::vector<double>> eval_bonus;
  std::uint64_t trace = HashCombine(0x7ace, root.Hash());

  std::vector<NodeStats*> path;
  std::vector<ActionId> actions;
  std::vector<double> rewards;
  for (int i = 0; i < params_.n_trajectories; ++i) {
    SimState state = root;
    FrameHistory frames = theta != nullptr ? history : FrameHistory(1);
    path.clear();
    actions.clear();
    rewards.clear();
    for (int depth = 0; depth < params_.max_depth; ++depth) {
      const std::uint64_t state_hash = state.Hash();
      NodeStats& node =
          result.tree.try_emplace(NodeKey{state_hash, depth}, num_actions)
              .first->second;
      const ActionId a = SelectAction(node, params_.exploration, rng, trace);

      int eval = -1;
      double bonus = 0.0;
      if (theta != nullptr) {
        const auto [it, inserted] = eval_of_key.try_emplace(
            frames.Key(), static_cast<int>(tape.observations.size()));
        if (inserted) {
          Observation obs = Observe(frames, mean_image_, env_.spec().frame_stack);
          ForwardResult fwd = Forward(*net_, *theta, obs);
          tape.observations.push_back(std::move(obs));
          tape.caches.push_back(std::move(fwd.cache));
          eval_bonus.push_back(std::move(fwd.bonus));
        }
        eval = it->second;
        bonus = eval_bonus[eval][a];
      }

      StepOutcome out = env_.Step(state, a);
      tape.entries.push_back(TapeEntry{i, depth, state_hash, a, eval, bonus,
                                       static_cast<double>(out.clipped_reward)});
      path.push_back(&node);
      actions.push_back(a);
      rewards.push_back(InternalReward(bonus, out.clipped_reward));
      if (out.planning_terminal()) break;
      state = std::move(out.next_state);
      if (theta != nullptr) frames.Push(env_.Render(state), state.Hash());
    }

    double ret = 0.0;
    for (std::size_t k = path.size(); k-- > 0;) {
      ret = rewards[k] + gamma * ret;
      NodeStats& node = *path[k];
      ++node.visits;
      ++node.action_visits[actions[k]];
      node.return_sum[actions[k]] += ret;
    }
    tape.root_actions.push_back(actions.front());
    ++tape.root_counts[actions.front()];
  }

  const NodeStats& root_node = result.tree.at(NodeKey{root.Hash(), 0});
  result.root_q.resize(num_actions);
  for (ActionId b = 0; b < num_actions; ++b) {
    if (root_node.action_visits[b] > 0) result.root_q[b] = root_node.Q(b);
  }
  result.rng_trace_id = trace;
  return result;
}

std::vector<double> SoftmaxPolicy(const RootValues& root_q, double temperature) {
  if (!(temperature > 0.0)) throw UsageError("softmax temperature must be > 0");
  double max_q = -std::numeric_limits<double>::infinity();
  for (const auto& q : root_q) {
    if (q) max_q = std::max(max_q, *q);
  }
  if (!std::isfinite(max_q)) {
    throw UsageError("SoftmaxPolicy: no visited action with a finite value");
  }
  std::vector<double> probs(root_q.size(), 0.0);
  double total = 0.0;
  for (std::size_t b = 0; b < root_q.size(); ++b) {
    if (root_q[b]) {
      probs[b] = std::exp((*root_q[b] - max_q) / temperature);
      total += probs[b];
    }
  }
  for (double& p : probs) p /= total;
  return probs;
}

ActionId SelectGreedy(const RootValues& root_q, Rng& rng) {
  std::vector<ActionId> best;
  double best_q = -std::numeric_limits<double>::infinity();
  for (ActionId b = 0; b < static_cast<ActionId>(root_q.size()); ++b) {
    if (!root_q[b]) continue;
    if (best.empty() || *root_q[b] > best_q) {
      best_q = *root_q[b];
      best.assign(1, b);
    } else if (*root_q[b] == best_q) {
      best.push_back(b);
    }
  }
  if (best.empty()) throw UsageError("SelectGreedy: no visited action");
  if (best.size() == 1) return best.front();
  return best[rng.Index(best.size())];
}

ActionId SampleAction(std::span<const double> probabilities, Rng& rng) {
  const double u = rng.Uniform();
  double cumulative = 0.0;
  ActionId last = -1;
  for (std::size_t a = 0; a < probabilities.size(); ++a) {
    if (probabilities[a] <= 0.0) continue;
    cumulative += probabilities[a];
    last = static_cast<ActionId>(a);
    if (u < cumulative) return last;
  }
  if (last < 0) throw UsageError("SampleAction: empty distribution");
  return last;
}

RootValues RootQFromTape(const RewardTape& tape, const NetworkSpec& net,
                         const ParamVector& theta) {
  std::vector<std::vector<double>> bonus;
  bonus.reserve(tape.observations.size());
  for (const Observation& obs : tape.observations) {
    bonus.push_back(Forward(net, theta, obs).bonus);
  }
  std::vector<double> return_sum(tape.num_actions, 0.0);
  std::size_t begin = 0;
  while (begin < tape.entries.size()) {
    const int traj = tape.entries[begin].trajectory;
    std::size_t end = begin;
    while (end < tape.entries.size() && tape.entries[end].trajectory == traj) ++end;
    double ret = 0.0;
    for (std::size_t k = end; k-- > begin;) {
      const TapeEntry& e = tape.entries[k];
      const double b = e.eval_index >= 0 ? bonus[e.eval_index][e.action] : 0.0;
      ret = InternalReward(b, e.objective_reward) + tape.gamma * ret;
    }
    return_sum[tape.root_actions[traj]] += ret;
    begin = end;
  }
  RootValues q(tape.num_actions);
  for (int b = 0; b < tape.num_actions; ++b) {
    if (tape.root_counts[b] > 0) q[b] = return_sum[b] / tape.root_counts[b];
  }
  return q;
}

void DumpPlan(std::ostream& out, const PlanResult& plan) {
  using nlohmann::json;
  json root_q = json::array();
  for (const auto& q : plan.root_q) {
    root_q.push_back(q ? json(*q) : json(nullptr));
  }
  out << json{{"type", "root"},
              {"root_q", root_q},
              {"root_counts", plan.tape.root_counts},
              {"rng_trace_id", plan.rng_trace_id}}
             .dump()
      << '\n';
  std::vector<std::pair<NodeKey, const NodeStats*>> nodes;
  for (const auto& [key, stats] : plan.tree) nodes.emplace_back(key, &stats);
  std::sort(nodes.begin(), nodes.end(), [](const auto& x, const auto& y) {
    return std::tie(x.first.depth, x.first.state_hash) <
           std::tie(y.first.depth, y.first.state_hash);
  });
  for (const auto& [key, stats] : nodes) {
    out << json{{"type", "node"},
                {"state_hash", key.state_hash},
                {"depth", key.depth},
                {"visits", stats->visits},
                {"action_visits", stats->action_visits},
                {"return_sum", stats->return_sum}}
               .dump()
        << '\n';
  }
  for (const TapeEntry& e : plan.tape.entries) {
    out << json{{"type", "tape"},
                {"trajectory", e.trajectory},
                {"depth", e.depth},
                {"state_hash", e.state_hash},
                {"action", e.action},
                {"eval_index", e.eval_index},
                {"bonus", e.bonus},
                {"objective_reward", e.objective_reward}}
               .dump()
        << '\n';
  }
}

}  // namespace pgrd
