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

#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include "pgrd/envsim.h"

namespace pgrd {
namespace {

EnvSpec Corridor(int length, int time_limit = 0) {
  EnvSpec spec;
  spec.family = EnvFamily::kDelayedCorridor;
  spec.length = length;
  spec.time_limit = time_limit;
  return spec;
}

EnvSpec Grid(std::uint64_t seed) {
  EnvSpec spec;
  spec.family = EnvFamily::kTrapGrid;
  spec.num_actions = 4;
  spec.seed = seed;
  spec.time_limit = 0;
  return spec;
}

EnvSpec Mdp(std::uint64_t seed, bool stochastic) {
  EnvSpec spec;
  spec.family = EnvFamily::kRandomMdp;
  spec.num_states = 6;
  spec.num_actions = 3;
  spec.stochastic = stochastic;
  spec.seed = seed;
  spec.time_limit = 30;
  return spec;
}

TEST_CASE("family names round-trip") {
  for (EnvFamily f : {EnvFamily::kDelayedCorridor, EnvFamily::kTrapGrid,
                      EnvFamily::kRandomMdp}) {
    CHECK(ParseEnvFamily(EnvFamilyName(f)) == f);
  }
  CHECK_THROWS_AS(ParseEnvFamily("pong"), ConfigError);
}

TEST_CASE("invalid specs are configuration errors") {
  EnvSpec spec = Corridor(0);
  CHECK_THROWS_AS(Environment{spec}, ConfigError);
  spec = Corridor(5);
  spec.num_actions = 1;
  CHECK_THROWS_AS(Environment{spec}, ConfigError);
  spec = Grid(1);
  spec.num_actions = 2;
  CHECK_THROWS_AS(Environment{spec}, ConfigError);
  spec = Grid(1);
  spec.num_traps = 35;
  CHECK_THROWS_AS(Environment{spec}, ConfigError);
}

TEST_CASE("reward clipping is the sign of the score change") {
  CHECK(ClipReward(20) == 1);
  CHECK(ClipReward(0) == 0);
  CHECK(ClipReward(-7) == -1);
}

TEST_CASE("corridor goal: rightward at the last cell ends the game") {
  Environment env(Corridor(5));
  SimState s = env.Reset(0);
  for (int i = 0; i < 4; ++i) {
    StepOutcome out = env.Step(s, 1);
    CHECK(out.score_delta == 0);
    CHECK_FALSE(out.game_over);
    s = out.next_state;
  }
  CHECK(s.payload[0] == 4);
  StepOutcome out = env.Step(s, 1);
  CHECK(out.game_over);
  CHECK(out.life_lost);
  CHECK(out.score_delta == 10);
  CHECK(out.clipped_reward == 1);
  CHECK(out.next_state.score == 10);
  CHECK_THROWS_AS(env.Step(out.next_state, 0), UsageError);
}

TEST_CASE("corridor left wall and no-op actions") {
  EnvSpec spec = Corridor(5);
  spec.num_actions = 3;
  Environment env(spec);
  const SimState s = env.Reset(0);
  CHECK(env.Step(s, 0).next_state == s);
  CHECK(env.Step(s, 2).next_state == s);
  CHECK_THROWS_AS(env.Step(s, 3), UsageError);
  CHECK_THROWS_AS(env.Step(s, -1), UsageError);
}

TEST_CASE("time limit ends the game") {
  Environment env(Corridor(10, 3));
  SimState s = env.Reset(0);
  s = env.Step(s, 0).next_state;
  s = env.Step(s, 0).next_state;
  const StepOutcome out = env.Step(s, 0);
  CHECK(out.game_over);
  CHECK(out.life_lost);
  CHECK(out.score_delta == 0);
}

TEST_CASE("frame skip repeats the action") {
  EnvSpec spec = Corridor(10);
  spec.frame_skip = 4;
  Environment env(spec);
  const StepOutcome out = env.Step(env.Reset(0), 1);
  CHECK(out.next_state.payload[0] == 4);
  CHECK(out.next_state.step_count == 4);
}

TEST_CASE("step is pure and copies are isolated") {
  for (const EnvSpec& spec : {Corridor(6), Grid(3), Mdp(4, true)}) {
    Environment env(spec);
    SimState s = env.Reset(11);
    for (int t = 0; t < 5 && !s.game_over; ++t) {
      const std::uint64_t before = s.Hash();
      const SimState copy = s;
      const StepOutcome a = env.Step(s, t % env.num_actions());
      const StepOutcome b = env.Step(s, t % env.num_actions());
      CHECK(s.Hash() == before);
      CHECK(s == copy);
      CHECK(a.next_state == b.next_state);
      CHECK(a.next_state.noise_key == b.next_state.noise_key);
      CHECK(a.score_delta == b.score_delta);
      s = a.next_state;
    }
  }
}

TEST_CASE("hash ignores bookkeeping fields") {
  Environment env(Corridor(6));
  SimState a = env.Reset(1);
  SimState b = env.Reset(2);
  b.score = 99;
  b.step_count = 7;
  CHECK(a == b);
  CHECK(a.Hash() == b.Hash());
  b.game_over = true;
  CHECK_FALSE(a == b);
  CHECK(a.Hash() != b.Hash());
}

TEST_CASE("clipped reward equals the sign of the score change everywhere") {
  for (const EnvSpec& spec : {Grid(5), Mdp(7, false), Mdp(8, true)}) {
    Environment env(spec);
    Rng rng(3);
    for (int game = 0; game < 20; ++game) {
      SimState s = env.Reset(rng.Next());
      for (int t = 0; t < 200 && !s.game_over; ++t) {
        const StepOutcome out = env.Step(s, static_cast<ActionId>(rng.Index(env.num_actions())));
        CHECK(out.clipped_reward >= -1);
        CHECK(out.clipped_reward <= 1);
        CHECK(out.clipped_reward == ClipReward(out.score_delta));
        if (out.game_over) CHECK(out.life_lost);
        s = out.next_state;
      }
    }
  }
}

TEST_CASE("corridor reward beyond the horizon is invisible to short rollouts") {
  const int length = 7;
  const int depth = 6;
  Environment env(Corridor(length));
  int paths = 0;
  std::function<void(const SimState&, int)> walk = [&](const SimState& s, int d) {
    if (d == depth || s.game_over) {
      ++paths;
      return;
    }
    for (ActionId a = 0; a < env.num_actions(); ++a) {
      const StepOutcome out = env.Step(s, a);
      CHECK(out.score_delta == 0);
      walk(out.next_state, d + 1);
    }
  };
  walk(env.Reset(0), 0);
  CHECK(paths == 64);

  // One step further and exactly one path collects the goal.
  int rewarded = 0;
  std::function<void(const SimState&, int)> walk_deeper = [&](const SimState& s, int d) {
    if (d == length || s.game_over) return;
    for (ActionId a = 0; a < env.num_actions(); ++a) {
      const StepOutcome out = env.Step(s, a);
      if (out.score_delta > 0) ++rewarded;
      walk_deeper(out.next_state, d + 1);
    }
  };
  walk_deeper(env.Reset(0), 0);
  CHECK(rewarded == 1);
}

TEST_CASE("trap grid layouts keep the goal reachable and are seeded") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EnvSpec spec = Grid(seed);
    spec.num_traps = 12;
    Environment env(spec);
    int traps = 0;
    for (bool t : env.traps()) traps += t;
    CHECK(traps == 12);
    CHECK_FALSE(env.traps().front());
    CHECK_FALSE(env.traps().back());
    CHECK(Environment(spec).traps() == env.traps());
  }
}

TEST_CASE("trap grid: a trap costs a life and the last life ends the game") {
  EnvSpec spec = Grid(0);
  spec.width = 2;
  spec.height = 2;
  spec.num_traps = 1;
  spec.lives = 2;
  Environment env(spec);
  // The trap sits right of or below the start.
  const ActionId into_trap = env.traps()[1] ? 3 : 1;
  SimState s = env.Reset(0);
  StepOutcome out = env.Step(s, into_trap);
  CHECK(out.life_lost);
  CHECK_FALSE(out.game_over);
  CHECK(out.next_state.payload[0] == 0);
  CHECK(out.next_state.payload[2] == 1);
  out = env.Step(out.next_state, into_trap);
  CHECK(out.life_lost);
  CHECK(out.game_over);
}

TEST_CASE("trap grid goal pays the goal score") {
  EnvSpec spec = Grid(0);
  spec.width = 2;
  spec.height = 1;
  spec.num_traps = 0;
  Environment env(spec);
  const StepOutcome out = env.Step(env.Reset(0), 3);
  CHECK(out.game_over);
  CHECK(out.score_delta == spec.goal_score);
}

TEST_CASE("random mdp tables are valid distributions") {
  Environment env(Mdp(9, true));
  const MdpTables& t = env.tables();
  CHECK(t.terminal.back());
  for (int s = 0; s < t.num_states; ++s) {
    for (int a = 0; a < t.num_actions; ++a) {
      double total = 0.0;
      for (const auto& [next, p] : t.next[s][a]) {
        CHECK(next >= 0);
        CHECK(next < t.num_states);
        total += p;
      }
      CHECK(total == doctest::Approx(1.0));
      CHECK(t.score[s][a] >= -2);
      CHECK(t.score[s][a] <= 3);
    }
  }
}

TEST_CASE("stochastic mdp draws both successors") {
  Environment env(Mdp(10, true));
  std::set<int> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    seen.insert(env.Step(env.Reset(seed), 0).next_state.payload[0]);
  }
  CHECK(seen.size() == 2);
}

TEST_CASE("frame history keys follow the state hashes") {
  FrameHistory h(2);
  CHECK(h.empty());
  h.Push(Frame(1, 3), 1);
  const std::uint64_t k1 = h.Key();
  h.Push(Frame(1, 3), 2);
  h.Push(Frame(1, 3), 3);
  CHECK(h.size() == 2);
  FrameHistory g(2);
  g.Push(Frame(1, 3), 2);
  g.Push(Frame(1, 3), 3);
  CHECK(g.Key() == h.Key());
  CHECK(k1 != h.Key());
  CHECK_THROWS_AS(FrameHistory(0), ConfigError);
}

TEST_CASE("observation of frames equal to the mean is zero") {
  Frame mean(2, 3);
  for (std::size_t p = 0; p < mean.pixels.size(); ++p) mean.pixels[p] = 0.1 * p;
  FrameHistory h(4);
  for (int i = 0; i < 4; ++i) h.Push(mean, i);
  const Observation obs = Observe(h, mean, 4);
  CHECK(obs.channels == 4);
  CHECK(obs.size() == 24);
  for (double v : obs.data) CHECK(v == 0.0);
}

TEST_CASE("short histories pad with the oldest frame") {
  Frame mean(1, 3);
  Frame f(1, 3);
  f.at(0, 1) = 1.0;
  FrameHistory h(4);
  h.Push(f, 1);
  Observation obs = Observe(h, mean, 4);
  for (int c = 0; c < 4; ++c) CHECK(obs.at(c, 0, 1) == 1.0);

  Frame g(1, 3);
  g.at(0, 2) = 1.0;
  h.Push(g, 2);
  obs = Observe(h, mean, 4);
  CHECK(obs.at(0, 0, 1) == 1.0);
  CHECK(obs.at(2, 0, 1) == 1.0);
  CHECK(obs.at(3, 0, 2) == 1.0);
  CHECK(obs.at(3, 0, 1) == 0.0);
}

TEST_CASE("observation errors") {
  FrameHistory h(4);
  CHECK_THROWS_AS(Observe(h, Frame(1, 3), 4), UsageError);
  h.Push(Frame(1, 4), 1);
  CHECK_THROWS_AS(Observe(h, Frame(1, 3), 4), ConfigError);
}

TEST_CASE("mean image averages random-policy frames") {
  Environment env(Corridor(4, 20));
  Rng rng(5);
  const MeanImage mean = ComputeMeanImage(env, 10, rng);
  double total = 0.0;
  for (double p : mean.pixels) total += p;
  // Every frame is one-hot over the cells.
  CHECK(total == doctest::Approx(1.0));
  CHECK(mean.pixels[0] > 0.0);
  Rng again(5);
  CHECK(ComputeMeanImage(env, 10, again).pixels == mean.pixels);
  CHECK_THROWS_AS(ComputeMeanImage(env, 0, rng), ConfigError);
}

}  // namespace
}  // namespace pgrd
