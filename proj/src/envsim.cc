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

#include "pgrd/envsim.h"

#include <algorithm>
#include <queue>
#include <string>

namespace pgrd {
namespace {

constexpr int kUp = 0;
constexpr int kDown = 1;
constexpr int kLeft = 2;
constexpr int kRight = 3;

void Require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid environment spec: " + what);
}

bool GoalReachable(int width, int height, const std::vector<bool>& traps) {
  std::vector<bool> seen(traps.size(), false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  const int goal = width * height - 1;
  while (!frontier.empty()) {
    const int cell = frontier.front();
    frontier.pop();
    if (cell == goal) return true;
    const int x = cell % width;
    const int y = cell / width;
    const int dx[] = {0, 0, -1, 1};
    const int dy[] = {-1, 1, 0, 0};
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx[k];
      const int ny = y + dy[k];
      if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
      const int next = ny * width + nx;
      if (seen[next] || traps[next]) continue;
      seen[next] = true;
      frontier.push(next);
    }
  }
  return false;
}

}  // namespace

std::string_view EnvFamilyName(EnvFamily family) {
  switch (family) {
    case EnvFamily::kDelayedCorridor:
      return "delayed_corridor";
    case EnvFamily::kTrapGrid:
      return "trap_grid";
    case EnvFamily::kRandomMdp:
      return "random_mdp";
  }
  return "unknown";
}

EnvFamily ParseEnvFamily(std::string_view name) {
  if (name == "delayed_corridor") return EnvFamily::kDelayedCorridor;
  if (name == "trap_grid") return EnvFamily::kTrapGrid;
  if (name == "random_mdp") return EnvFamily::kRandomMdp;
  throw ConfigError("unknown environment family '" + std::string(name) + "'");
}

void EnvSpec::Validate() const {
  Require(num_actions >= 2, "num_actions must be >= 2");
  Require(frame_skip >= 1, "frame_skip must be >= 1");
  Require(frame_stack >= 1, "frame_stack must be >= 1");
  Require(time_limit >= 0, "time_limit must be >= 0");
  switch (family) {
    case EnvFamily::kDelayedCorridor:
      Require(length >= 1, "length must be positive");
      Require(goal_score > 0, "goal_score must be positive");
      break;
    case EnvFamily::kTrapGrid:
      Require(width >= 1 && height >= 1 && width * height >= 2,
              "grid needs at least two cells");
      Require(num_traps >= 0 && num_traps <= width * height - 2,
              "num_traps out of range");
      Require(lives >= 1, "lives must be positive");
      Require(goal_score > 0, "goal_score must be positive");
      Require(num_actions >= 4, "trap_grid needs 4 movement actions");
      break;
    case EnvFamily::kRandomMdp:
      Require(num_states >= (terminal_state ? 2 : 1),
              "num_states too small");
      break;
  }
}

std::uint64_t SimState::Hash() const {
  std::uint64_t h = HashCombine(0x5157a7e, game_over ? 1 : 0);
  for (std::int32_t v : payload) {
    h = HashCombine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
  }
  return h;
}

int ClipReward(std::int64_t score_delta) {
  return (score_delta > 0) - (score_delta < 0);
}

FrameHistory::FrameHistory(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw ConfigError("frame history capacity must be >= 1");
}

void FrameHistory::Push(Frame frame, std::uint64_t state_hash) {
  frames_.push_back(std::move(frame));
  keys_.push_back(state_hash);
  if (static_cast<int>(frames_.size()) > capacity_) {
    frames_.pop_front();
    keys_.pop_front();
  }
}

void FrameHistory::Clear() {
  frames_.clear();
  keys_.clear();
}

std::uint64_t FrameHistory::Key() const {
  std::uint64_t h = HashCombine(0xf4a3e, keys_.size());
  for (std::uint64_t k : keys_) h = HashCombine(h, k);
  return h;
}

Observation Observe(const FrameHistory& history, const MeanImage& mean,
                    int frame_stack) {
  if (history.empty()) throw UsageError("Observe: empty frame history");
  if (frame_stack < 1) throw ConfigError("frame_stack must be >= 1");
  const auto& frames = history.frames();
  Observation obs;
  obs.channels = frame_stack;
  obs.height = mean.height;
  obs.width = mean.width;
  obs.data.resize(static_cast<std::size_t>(frame_stack) * mean.pixels.size());
  const int available = static_cast<int>(frames.size());
  const int pad = std::max(0, frame_stack - available);
  const int first = std::max(0, available - frame_stack);
  for (int c = 0; c < frame_stack; ++c) {
    const Frame& f = frames[c < pad ? first : first + c - pad];
    if (f.height != mean.height || f.width != mean.width) {
      throw ConfigError("Observe: frame is " + std::to_string(f.height) + "x" +
                        std::to_string(f.width) + " but mean image is " +
                        std::to_string(mean.height) + "x" +
                        std::to_string(mean.width));
    }
    double* out = obs.data.data() + c * mean.pixels.size();
    for (std::size_t p = 0; p < mean.pixels.size(); ++p) {
      out[p] = f.pixels[p] - mean.pixels[p];
    }
  }
  return obs;
}

Environment::Environment(EnvSpec spec) : spec_(spec) {
  spec_.Validate();
  Rng rng(SplitMix64(spec_.seed));
  if (spec_.family == EnvFamily::kTrapGrid) {
    const int cells = spec_.width * spec_.height;
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) {
        throw ConfigError("trap_grid: no layout with a reachable goal");
      }
      traps_.assign(cells, false);
      std::vector<int> candidates;
      for (int c = 1; c < cells - 1; ++c) candidates.push_back(c);
      for (int k = 0; k < spec_.num_traps; ++k) {
        const std::size_t pick = k + rng.Index(candidates.size() - k);
        std::swap(candidates[k], candidates[pick]);
        traps_[candidates[k]] = true;
      }
      if (GoalReachable(spec_.width, spec_.height, traps_)) break;
    }
  } else if (spec_.family == EnvFamily::kRandomMdp) {
    const int n = spec_.num_states;
    const int a_count = spec_.num_actions;
    tables_.num_states = n;
    tables_.num_actions = a_count;
    tables_.next.assign(n, std::vector<std::vector<std::pair<int, double>>>(a_count));
    tables_.score.assign(n, std::vector<int>(a_count, 0));
    tables_.terminal.assign(n, false);
    if (spec_.terminal_state) tables_.terminal[n - 1] = true;
    for (int s = 0; s < n; ++s) {
      for (int a = 0; a < a_count; ++a) {
        if (rng.Uniform() < 0.5) {
          tables_.score[s][a] = static_cast<int>(rng.Index(6)) - 2;  // -2..3
        }
        const int first = static_cast<int>(rng.Index(n));
        if (!spec_.stochastic || n == 1) {
          tables_.next[s][a] = {{first, 1.0}};
        } else {
          int second = static_cast<int>(rng.Index(n - 1));
          if (second >= first) ++second;
          const double p = 0.2 + 0.6 * rng.Uniform();
          tables_.next[s][a] = {{first, p}, {second, 1.0 - p}};
        }
      }
    }
  }
}

int Environment::frame_height() const {
  return spec_.family == EnvFamily::kTrapGrid ? spec_.height : 1;
}

int Environment::frame_width() const {
  switch (spec_.family) {
    case EnvFamily::kDelayedCorridor:
      return spec_.length;
    case EnvFamily::kTrapGrid:
      return spec_.width;
    case EnvFamily::kRandomMdp:
      return spec_.num_states;
  }
  return 0;
}

SimState Environment::Reset(std::uint64_t rng_seed) const {
  SimState s;
  switch (spec_.family) {
    case EnvFamily::kDelayedCorridor:
      s.payload = {0};
      break;
    case EnvFamily::kTrapGrid:
      s.payload = {0, 0, spec_.lives};
      break;
    case EnvFamily::kRandomMdp:
      s.payload = {0};
      break;
  }
  s.noise_key = SplitMix64(rng_seed);
  return s;
}

void Environment::Advance(SimState& state, ActionId action,
                          std::int64_t& delta, bool& life_lost) const {
  switch (spec_.family) {
    case EnvFamily::kDelayedCorridor: {
      int& pos = state.payload[0];
      if (action == 0) {
        pos = std::max(0, pos - 1);
      } else if (action == 1) {
        if (pos == spec_.length - 1) {
          delta += spec_.goal_score;
          state.game_over = true;
        } else {
          ++pos;
        }
      }
      break;
    }
    case EnvFamily::kTrapGrid: {
      int& x = state.payload[0];
      int& y = state.payload[1];
      int& lives = state.payload[2];
      if (action == kUp) y = std::max(0, y - 1);
      if (action == kDown) y = std::min(spec_.height - 1, y + 1);
      if (action == kLeft) x = std::max(0, x - 1);
      if (action == kRight) x = std::min(spec_.width - 1, x + 1);
      const int cell = y * spec_.width + x;
      if (cell == spec_.width * spec_.height - 1) {
        delta += spec_.goal_score;
        state.game_over = true;
      } else if (traps_[cell]) {
        life_lost = true;
        --lives;
        x = 0;
        y = 0;
        if (lives == 0) state.game_over = true;
      }
      break;
    }
    case EnvFamily::kRandomMdp: {
      int& s = state.payload[0];
      delta += tables_.score[s][action];
      const auto& successors = tables_.next[s][action];
      int next = successors.front().first;
      if (successors.size() > 1) {
        const std::uint64_t bits = SplitMix64(HashCombine(
            state.noise_key, static_cast<std::uint64_t>(s * 131 + action)));
        double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
        for (const auto& [candidate, p] : successors) {
          next = candidate;
          if (u < p) break;
          u -= p;
        }
      }
      state.noise_key = SplitMix64(state.noise_key);
      s = next;
      if (tables_.terminal[s]) state.game_over = true;
      break;
    }
  }
  ++state.step_count;
  if (spec_.time_limit > 0 && state.step_count >= spec_.time_limit) {
    state.game_over = true;
  }
}

StepOutcome Environment::Step(const SimState& state, ActionId action) const {
  if (action < 0 || action >= spec_.num_actions) {
    throw UsageError("Step: action " + std::to_string(action) +
                     " out of range");
  }
  if (state.game_over) throw UsageError("Step: state is game over");
  StepOutcome out;
  out.next_state = state;
  for (int frame = 0; frame < spec_.frame_skip; ++frame) {
    Advance(out.next_state, action, out.score_delta, out.life_lost);
    if (out.life_lost || out.next_state.game_over) break;
  }
  out.game_over = out.next_state.game_over;
  out.life_lost = out.life_lost || out.game_over;
  out.next_state.score += out.score_delta;
  out.clipped_reward = ClipReward(out.score_delta);
  return out;
}

Frame Environment::Render(const SimState& state) const {
  Frame f(frame_height(), frame_width());
  switch (spec_.family) {
    case EnvFamily::kDelayedCorridor:
      f.at(0, state.payload[0]) = 1.0;
      break;
    case EnvFamily::kTrapGrid:
      for (int y = 0; y < spec_.height; ++y) {
        for (int x = 0; x < spec_.width; ++x) {
          if (traps_[y * spec_.width + x]) f.at(y, x) = -1.0;
        }
      }
      f.at(spec_.height - 1, spec_.width - 1) = 0.5;
      f.at(state.payload[1], state.payload[0]) = 1.0;
      break;
    case EnvFamily::kRandomMdp:
      f.at(0, state.payload[0]) = 1.0;
      break;
  }
  return f;
}

MeanImage ComputeMeanImage(const Environment& env, int n_games, Rng& rng,
                           int max_steps) {
  if (n_games < 1) throw ConfigError("mean image needs at least one game");
  MeanImage mean(env.frame_height(), env.frame_width());
  std::size_t count = 0;
  auto accumulate = [&](const SimState& s) {
    const Frame f = env.Render(s);
    for (std::size_t p = 0; p < f.pixels.size(); ++p) mean.pixels[p] += f.pixels[p];
    ++count;
  };
  for (int game = 0; game < n_games; ++game) {
    SimState s = env.Reset(rng.Next());
    accumulate(s);
    for (int t = 0; t < max_steps && !s.game_over; ++t) {
      const auto action = static_cast<ActionId>(rng.Index(env.num_actions()));
      s = env.Step(s, action).next_state;
      accumulate(s);
    }
  }
  for (double& p : mean.pixels) p /= static_cast<double>(count);
  return mean;
}

}  // namespace pgrd
