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

// Generative-model environments. Every environment is an immutable spec plus
// a pure Step() on copyable SimStates, so the planner can branch freely.
//
// Score conventions follow the arcade setting: the objective reward of a
// transition is sign(score delta), a life-losing transition is terminal for
// planning and training, and only game over is terminal for evaluation.

#ifndef PGRD_ENVSIM_H_
#define PGRD_ENVSIM_H_

#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pgrd/common.h"

namespace pgrd {

enum class EnvFamily { kDelayedCorridor, kTrapGrid, kRandomMdp };

std::string_view EnvFamilyName(EnvFamily family);
EnvFamily ParseEnvFamily(std::string_view name);

struct EnvSpec {
  EnvFamily family = EnvFamily::kDelayedCorridor;

  // DelayedCorridor: cells 0..length-1, start at 0. Moving right from the
  // last cell collects goal_score and ends the game, so the first reward is
  // `length` decisions away from the start.
  int length = 24;
  int goal_score = 10;

  // TrapGrid: width x height board, start top-left, goal bottom-right,
  // num_traps trap cells that cost a life and send the agent back to start.
  int width = 6;
  int height = 6;
  int num_traps = 5;
  int lives = 3;

  // RandomMdp: seeded transition/reward tables over num_states states.
  // State num_states-1 is an absorbing game-over state when terminal_state.
  int num_states = 5;
  bool stochastic = false;
  bool terminal_state = true;

  int num_actions = 2;
  // Game over after this many frames; 0 disables the limit.
  int time_limit = 50;
  int frame_skip = 1;
  int frame_stack = 4;
  // Seeds the layout (TrapGrid) or the tables (RandomMdp).
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void Validate() const;
};

// Opaque environment state. Equality and hashing use the payload (plus the
// game-over flag) only: score, step count and the noise key are bookkeeping.
struct SimState {
  std::vector<std::int32_t> payload;
  std::int64_t score = 0;
  int step_count = 0;
  bool game_over = false;
  // Drives stochastic transitions so that Step() stays a pure function.
  std::uint64_t noise_key = 0;

  std::uint64_t Hash() const;
  bool operator==(const SimState& other) const {
    return game_over == other.game_over && payload == other.payload;
  }
};

struct StepOutcome {
  SimState next_state;
  std::int64_t score_delta = 0;
  int clipped_reward = 0;
  bool life_lost = false;
  bool game_over = false;

  // Terminal for planning and training.
  bool planning_terminal() const { return life_lost || game_over; }
};

int ClipReward(std::int64_t score_delta);

// Single-channel screen image.
struct Frame {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;

  Frame() = default;
  Frame(int h, int w, double fill = 0.0)
      : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, fill) {}
  double& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// Network input: `channels` stacked frames, oldest first, row-major.
struct Observation {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  std::size_t size() const { return data.size(); }
  double& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

// The last `capacity` frames together with the hashes of the states that
// produced them. The hash sequence identifies the observation, which lets
// the planner share one network evaluation between transposed histories.
class FrameHistory {
 public:
  explicit FrameHistory(int capacity = 4);

  void Push(Frame frame, std::uint64_t state_hash);
  void Clear();
  bool empty() const { return frames_.empty(); }
  int size() const { return static_cast<int>(frames_.size()); }
  int capacity() const { return capacity_; }
  const std::deque<Frame>& frames() const { return frames_; }

  // Identity of the observation this history produces.
  std::uint64_t Key() const;

 private:
  int capacity_;
  std::deque<Frame> frames_;
  std::deque<std::uint64_t> keys_;
};

using MeanImage = Frame;

// Stacks the history into `frame_stack` channels (padding short histories by
// repeating the oldest frame) and subtracts the per-pixel mean image.
Observation Observe(const FrameHistory& history, const MeanImage& mean,
                    int frame_stack);

// Transition structure of a RandomMdp instance.
struct MdpTables {
  int num_states = 0;
  int num_actions = 0;
  // next[s][a] = list of (next state, probability).
  std::vector<std::vector<std::vector<std::pair<int, double>>>> next;
  // Score delta of taking a in s.
  std::vector<std::vector<int>> score;
  std::vector<bool> terminal;
};

class Environment {
 public:
  explicit Environment(EnvSpec spec);

  const EnvSpec& spec() const { return spec_; }
  int num_actions() const { return spec_.num_actions; }
  int frame_height() const;
  int frame_width() const;

  SimState Reset(std::uint64_t rng_seed) const;
  // Repeats `action` for frame_skip frames, stopping early on a lost life or
  // game over. Throws UsageError on a bad action or a game-over state.
  StepOutcome Step(const SimState& state, ActionId action) const;
  Frame Render(const SimState& state) const;

  // Only meaningful for kRandomMdp.
  const MdpTables& tables() const { return tables_; }
  // Only meaningful for kTrapGrid; row-major, true where a trap sits.
  const std::vector<bool>& traps() const { return traps_; }

 private:
  // One emulator frame.
  void Advance(SimState& state, ActionId action, std::int64_t& delta,
               bool& life_lost) const;

  EnvSpec spec_;
  MdpTables tables_;
  std::vector<bool> traps_;
};

// Pixel-wise mean over every frame seen in `n_games` uniformly random games.
// Games are cut at `max_steps` decisions when the environment has no time
// limit. Throws ConfigError when n_games < 1.
MeanImage ComputeMeanImage(const Environment& env, int n_games, Rng& rng,
                           int max_steps = 10000);

}  // namespace pgrd

#endif  // PGRD_ENVSIM_H_
