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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgrd/oracles.h"
#include "pgrd/uct.h"

namespace pgrd {
namespace {

EnvSpec MdpSpec(std::uint64_t seed, int states = 6, int actions = 3) {
  EnvSpec spec;
  spec.family = EnvFamily::kRandomMdp;
  spec.num_states = states;
  spec.num_actions = actions;
  spec.seed = seed;
  spec.terminal_state = false;
  spec.time_limit = 0;
  return spec;
}

EnvSpec CorridorSpec(int length, int time_limit) {
  EnvSpec spec;
  spec.family = EnvFamily::kDelayedCorridor;
  spec.length = length;
  spec.time_limit = time_limit;
  spec.frame_stack = 2;
  return spec;
}

struct BonusSetup {
  NetworkSpec net;
  ParamVector theta;
  MeanImage mean;
};

BonusSetup RandomBonus(const Environment& env, Rng& rng) {
  const Shape3 in{env.spec().frame_stack, env.frame_height(), env.frame_width()};
  NetworkSpec net = NetworkSpec::Parse(
      "conv:3x1x2/1,relu,dense:" + std::to_string(env.num_actions()), in);
  ParamVector theta = oracles::RandomParams(net, rng);
  MeanImage mean = ComputeMeanImage(env, 3, rng, 50);
  return {std::move(net), std::move(theta), std::move(mean)};
}

FrameHistory RootHistory(const Environment& env, const SimState& root, int stack) {
  FrameHistory h(stack);
  h.Push(env.Render(root), root.Hash());
  return h;
}

TEST_CASE("planner parameter validation") {
  Environment env(MdpSpec(1));
  CHECK_THROWS_AS(Planner(env, PlannerParams{0, 5, 0.1, 0.9}), ConfigError);
  CHECK_THROWS_AS(Planner(env, PlannerParams{10, 0, 0.1, 0.9}), ConfigError);
  CHECK_THROWS_AS(Planner(env, PlannerParams{10, 5, -1.0, 0.9}), ConfigError);
  CHECK_THROWS_AS(Planner(env, PlannerParams{10, 5, 0.1, 1.0}), ConfigError);
}

TEST_CASE("ucb score formula") {
  NodeStats node(2);
  node.visits = 8;
  node.action_visits = {2, 6};
  node.return_sum = {1.0, 3.0};
  CHECK(UcbScore(node, 0, 0.5) == doctest::Approx(0.5 + 0.5 * std::sqrt(std::log(8.0) / 2)));
  node.action_visits[1] = 0;
  CHECK_THROWS_AS(UcbScore(node, 1, 0.5), UsageError);
}

TEST_CASE("depth-one planning returns the clipped immediate rewards") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Environment env(MdpSpec(seed));
    Planner planner(env, PlannerParams{12, 1, 0.1, 0.99});
    const SimState root = env.Reset(0);
    Rng rng(seed);
    const PlanResult plan = planner.Plan(root, FrameHistory(1), nullptr, rng);
    for (ActionId a = 0; a < env.num_actions(); ++a) {
      REQUIRE(plan.root_q[a].has_value());
      CHECK(*plan.root_q[a] == ClipReward(env.tables().score[0][a]));
    }
  }
}

TEST_CASE("visit counts are conserved") {
  Environment env(MdpSpec(3));
  const PlannerParams params{200, 6, 0.5, 0.9};
  Planner planner(env, params);
  Rng rng(4);
  const PlanResult plan = planner.Plan(env.Reset(0), FrameHistory(1), nullptr, rng);
  const NodeStats& root = plan.tree.at(NodeKey{env.Reset(0).Hash(), 0});
  CHECK(root.visits == params.n_trajectories);
  int counted = 0;
  for (int c : plan.tape.root_counts) counted += c;
  CHECK(counted == params.n_trajectories);
  std::map<int, int> visits_by_depth;
  for (const auto& [key, node] : plan.tree) {
    int sum = 0;
    for (int v : node.action_visits) sum += v;
    CHECK(sum == node.visits);
    visits_by_depth[key.depth] += node.visits;
  }
  // Without terminal states every trajectory reaches the full depth.
  for (const auto& [depth, total] : visits_by_depth) {
    CHECK(total == params.n_trajectories);
  }
  CHECK(plan.tape.entries.size() ==
        static_cast<std::size_t>(params.n_trajectories * params.max_depth));
}

TEST_CASE("root values are the average discounted returns on the tape") {
  Environment env(MdpSpec(5));
  Rng rng(6);
  const BonusSetup bonus = RandomBonus(env, rng);
  Planner planner(env, PlannerParams{150, 5, 0.3, 0.9}, bonus.net, bonus.mean);
  const SimState root = env.Reset(0);
  const PlanResult plan =
      planner.Plan(root, RootHistory(env, root, 4), &bonus.theta, rng);

  // Tape completeness: each trajectory is a run of depths 0, 1, ... starting
  // at the root with the recorded root action.
  std::vector<double> sums(env.num_actions(), 0.0);
  std::vector<int> counts(env.num_actions(), 0);
  int expected_traj = 0;
  std::size_t k = 0;
  while (k < plan.tape.entries.size()) {
    const int traj = plan.tape.entries[k].trajectory;
    CHECK(traj == expected_traj);
    CHECK(plan.tape.entries[k].state_hash == root.Hash());
    CHECK(plan.tape.entries[k].action == plan.tape.root_actions[traj]);
    double ret = 0.0;
    double discount = 1.0;
    int depth = 0;
    for (; k < plan.tape.entries.size() && plan.tape.entries[k].trajectory == traj; ++k) {
      const TapeEntry& e = plan.tape.entries[k];
      CHECK(e.depth == depth++);
      CHECK(e.eval_index >= 0);
      const auto b = Forward(bonus.net, bonus.theta,
                             plan.tape.observations[e.eval_index]).bonus;
      CHECK(e.bonus == b[e.action]);
      ret += discount * e.internal_reward();
      discount *= 0.9;
    }
    sums[plan.tape.root_actions[traj]] += ret;
    ++counts[plan.tape.root_actions[traj]];
    ++expected_traj;
  }
  CHECK(expected_traj == 150);
  CHECK(counts == plan.tape.root_counts);
  for (ActionId a = 0; a < env.num_actions(); ++a) {
    REQUIRE(plan.root_q[a].has_value());
    CHECK(*plan.root_q[a] == doctest::Approx(sums[a] / counts[a]).epsilon(1e-12));
  }

  // Recomputing under the planning parameters is bit identical.
  const RootValues again = RootQFromTape(plan.tape, bonus.net, bonus.theta);
  for (ActionId a = 0; a < env.num_actions(); ++a) CHECK(*again[a] == *plan.root_q[a]);
}

TEST_CASE("transposed histories share one network evaluation") {
  Environment env(MdpSpec(2, 3, 2));
  Rng rng(7);
  const BonusSetup bonus = RandomBonus(env, rng);
  Planner planner(env, PlannerParams{300, 4, 1.0, 0.9}, bonus.net, bonus.mean);
  const SimState root = env.Reset(0);
  const PlanResult plan =
      planner.Plan(root, RootHistory(env, root, 4), &bonus.theta, rng);
  CHECK(plan.tape.observations.size() == plan.tape.caches.size());
  CHECK(plan.tape.observations.size() < plan.tape.entries.size());
}

TEST_CASE("planning stops at a lost life or game over") {
  Environment env(CorridorSpec(4, 3));
  Planner planner(env, PlannerParams{50, 10, 0.1, 0.9});
  Rng rng(8);
  const PlanResult plan = planner.Plan(env.Reset(0), FrameHistory(1), nullptr, rng);
  for (const TapeEntry& e : plan.tape.entries) CHECK(e.depth < 3);
}

TEST_CASE("planning is deterministic given the random stream") {
  Environment env(MdpSpec(9));
  Planner planner(env, PlannerParams{80, 5, 0.2, 0.95});
  Rng a(10);
  Rng b(10);
  const PlanResult pa = planner.Plan(env.Reset(0), FrameHistory(1), nullptr, a);
  const PlanResult pb = planner.Plan(env.Reset(0), FrameHistory(1), nullptr, b);
  CHECK(pa.rng_trace_id == pb.rng_trace_id);
  CHECK(pa.tape.root_actions == pb.tape.root_actions);
  for (std::size_t i = 0; i < pa.root_q.size(); ++i) CHECK(pa.root_q[i] == pb.root_q[i]);
}

TEST_CASE("plan argument checks") {
  Environment env(MdpSpec(1));
  Rng rng(1);
  const BonusSetup bonus = RandomBonus(env, rng);
  Planner plain(env, PlannerParams{});
  Planner with_bonus(env, PlannerParams{}, bonus.net, bonus.mean);
  const SimState root = env.Reset(0);
  CHECK_THROWS_AS(plain.Plan(root, FrameHistory(1), &bonus.theta, rng), UsageError);
  CHECK_THROWS_AS(with_bonus.Plan(root, FrameHistory(1), nullptr, rng), UsageError);
  CHECK_THROWS_AS(with_bonus.Plan(root, FrameHistory(1), &bonus.theta, rng), UsageError);
  SimState over = root;
  over.game_over = true;
  CHECK_THROWS_AS(plain.Plan(over, FrameHistory(1), nullptr, rng), UsageError);
  EnvSpec other = MdpSpec(1);
  other.num_actions = 4;
  Environment wide(other);
  CHECK_THROWS_AS(Planner(wide, PlannerParams{}, bonus.net, bonus.mean), ConfigError);
}

TEST_CASE("root values approach the finite-horizon optimum with budget") {
  Environment env(MdpSpec(11, 4, 2));
  const oracles::TabularMDP mdp = oracles::TabularFromEnvironment(env, 0.5);
  const auto q = oracles::DpQ(mdp, 3);
  double previous = 1e9;
  for (int budget : {30, 3000, 100000}) {
    Planner planner(env, PlannerParams{budget, 3, 0.1, 0.5});
    Rng rng(12);
    const PlanResult plan = planner.Plan(env.Reset(0), FrameHistory(1), nullptr, rng);
    const ActionId best = q[0][0][0] >= q[0][0][1] ? 0 : 1;
    const double error = std::abs(*plan.root_q[best] - q[0][0][best]);
    CHECK(error <= previous);
    previous = error;
  }
  CHECK(previous < 1e-3);
}

TEST_CASE("softmax examples") {
  auto p = SoftmaxPolicy({1.0, 0.0});
  CHECK(p[0] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(p[1] == doctest::Approx(0.2689).epsilon(1e-4));
  p = SoftmaxPolicy({2.0, 2.0, 2.0});
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0));
  const auto shifted = SoftmaxPolicy({6.0, 5.0});
  const auto base = SoftmaxPolicy({1.0, 0.0});
  CHECK(std::abs(shifted[0] - base[0]) <= 1e-12);
  p = SoftmaxPolicy({std::nullopt, 1.0, 0.0});
  CHECK(p[0] == 0.0);
  CHECK(p[1] == doctest::Approx(0.7311).epsilon(1e-4));
  p = SoftmaxPolicy({1000.0, -1000.0});
  CHECK(p[0] == 1.0);
  CHECK_THROWS_AS(SoftmaxPolicy({std::nullopt, std::nullopt}), UsageError);
  CHECK_THROWS_AS(SoftmaxPolicy({1.0}, 0.0), UsageError);
}

TEST_CASE("greedy selection breaks two-way ties evenly") {
  Rng rng(13);
  const RootValues q{0.5, std::nullopt, 0.5, 0.1};
  int first = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const ActionId a = SelectGreedy(q, rng);
    CHECK((a == 0 || a == 2));
    first += a == 0;
  }
  CHECK(std::abs(first / static_cast<double>(trials) - 0.5) <= 0.05);
  CHECK(SelectGreedy({0.1, 0.7, std::nullopt}, rng) == 1);
  CHECK_THROWS_AS(SelectGreedy({std::nullopt}, rng), UsageError);
}

TEST_CASE("sampled actions follow the distribution") {
  Rng rng(14);
  const std::vector<double> p{0.2, 0.0, 0.8};
  std::vector<int> counts(3, 0);
  for (int t = 0; t < 20000; ++t) ++counts[SampleAction(p, rng)];
  CHECK(counts[1] == 0);
  CHECK(counts[0] / 20000.0 == doctest::Approx(0.2).epsilon(0.05));
  CHECK_THROWS_AS(SampleAction(std::vector<double>{0.0, 0.0}, rng), UsageError);
}

TEST_CASE("plan dump is line-delimited json") {
  Environment env(MdpSpec(15));
  Planner planner(env, PlannerParams{20, 3, 0.1, 0.9});
  Rng rng(15);
  const PlanResult plan = planner.Plan(env.Reset(0), FrameHistory(1), nullptr, rng);
  std::ostringstream out;
  DumpPlan(out, plan);
  std::istringstream in(out.str());
  std::string line;
  std::map<std::string, std::size_t> kinds;
  while (std::getline(in, line)) {
    const auto record = nlohmann::json::parse(line);
    ++kinds[record.at("type").get<std::string>()];
  }
  CHECK(kinds["root"] == 1);
  CHECK(kinds["node"] == plan.tree.size());
  CHECK(kinds["tape"] == plan.tape.entries.size());
}

}  // namespace
}  // namespace pgrd
