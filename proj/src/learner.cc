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

#include "pgrd/learner.h"

#include <chrono>
#include <cmath>
#include <iostream>

namespace pgrd {

void GarbState::BeginEpisode() {
  trace.SetZero();
  accumulator.SetZero();
  episode_steps = 0;
}

void TrainConfig::Validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (halving_period < 1) throw ConfigError("halving_period must be >= 1");
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("beta must be in [0,1)");
  if (max_episodes < 1) throw ConfigError("max_episodes must be >= 1");
  if (max_total_steps < 1) throw ConfigError("max_total_steps must be >= 1");
  if (episode_step_cap < 1) throw ConfigError("episode_step_cap must be >= 1");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (!(baseline_rate > 0.0 && baseline_rate <= 1.0)) {
    throw ConfigError("baseline_rate must be in (0,1]");
  }
}

std::vector<double> RewardSensitivities(const RewardTape& tape, ActionId chosen,
                                        std::span<const double> policy,
                                        double temperature) {
  if (static_cast<int>(policy.size()) != tape.num_actions) {
    throw UsageError("RewardSensitivities: policy size mismatch");
  }
  if (chosen < 0 || chosen >= tape.num_actions) {
    throw UsageError("RewardSensitivities: chosen action out of range");
  }
  // Only the trajectory's own root action has I_i(b) = 1, so the sum over b
  // collapses to one term per trajectory.
  std::vector<double> per_trajectory(tape.num_trajectories());
  for (int i = 0; i < tape.num_trajectories(); ++i) {
    const ActionId b = tape.root_actions[i];
    const double indicator = b == chosen ? 1.0 : 0.0;
    per_trajectory[i] =
        (indicator - policy[b]) / (tape.root_counts[b] * temperature);
  }
  std::vector<double> delta(tape.entries.size());
  for (std::size_t k = 0; k < tape.entries.size(); ++k) {
    const TapeEntry& e = tape.entries[k];
    delta[k] = per_trajectory[e.trajectory] * std::pow(tape.gamma, e.depth);
  }
  return delta;
}

ParamVector LogPolicyGradient(const NetworkSpec& net, const ParamVector& theta,
                              const RewardTape& tape,
                              std::span<const double> sensitivities) {
  if (sensitivities.size() != tape.entries.size()) {
    throw UsageError("LogPolicyGradient: one sensitivity per tape entry needed");
  }
  const int num_outputs = net.num_outputs();
  std::vector<std::vector<double>> output_grad(
      tape.observations.size(), std::vector<double>(num_outputs, 0.0));
  for (std::size_t k = 0; k < tape.entries.size(); ++k) {
    const TapeEntry& e = tape.entries[k];
    if (e.eval_index < 0) continue;
    output_grad[e.eval_index][e.action] += sensitivities[k];
  }
  ParamVector grad(net.num_params());
  for (std::size_t j = 0; j < tape.observations.size(); ++j) {
    bool any = false;
    for (double g : output_grad[j]) any = any || g != 0.0;
    if (!any) continue;
    if (j < tape.caches.size()) {
      BackwardInto(net, theta, tape.caches[j], output_grad[j], grad);
    } else {
      const ForwardResult fwd = Forward(net, theta, tape.observations[j]);
      BackwardInto(net, theta, fwd.cache, output_grad[j], grad);
    }
  }
  return grad;
}

void GarbStep(GarbState& state, const ParamVector& grad_log_mu, double reward) {
  state.trace *= state.beta;
  state.trace += grad_log_mu;
  state.accumulator.Axpy(reward - state.baseline, state.trace);
  ++state.rewards_seen;
  if (state.baseline_mode == BaselineMode::kCumulativeMean) {
    state.baseline += (reward - state.baseline) / static_cast<double>(state.rewards_seen);
  } else {
    state.baseline += state.baseline_rate * (reward - state.baseline);
  }
  ++state.episode_steps;
}

bool EndEpisodeUpdate(ParamVector& theta, GarbState& garb, AdamState& adam,
                      double learning_rate) {
  const ParamVector& g = garb.accumulator;
  const bool finite = g.AllFinite();
  if (finite) {
    ++adam.t;
    const double correction1 = 1.0 - std::pow(adam.beta1, adam.t);
    const double correction2 = 1.0 - std::pow(adam.beta2, adam.t);
    for (std::size_t k = 0; k < theta.size(); ++k) {
      adam.m[k] = adam.beta1 * adam.m[k] + (1.0 - adam.beta1) * g[k];
      adam.v[k] = adam.beta2 * adam.v[k] + (1.0 - adam.beta2) * g[k] * g[k];
      const double m_hat = adam.m[k] / correction1;
      const double v_hat = adam.v[k] / correction2;
      theta[k] += learning_rate * m_hat / (std::sqrt(v_hat) + adam.epsilon);
    }
  } else {
    std::cerr << "pgrd: non-finite gradient estimate, episode update skipped\n";
  }
  garb.trace.SetZero();
  garb.accumulator.SetZero();
  return finite;
}

double LearningRateAt(int episode, const TrainConfig& config) {
  if (episode < 0) throw UsageError("LearningRateAt: negative episode");
  return std::ldexp(config.learning_rate, -(episode / config.halving_period));
}

TrainResult Train(const Environment& env, const NetworkSpec& net,
                  const MeanImage& mean_image, ParamVector theta,
                  const PlannerParams& planner_params, const TrainConfig& config,
                  const TrainSeeds& seeds, const EpisodeCallback& on_episode) {
  config.Validate();
  if (theta.size() != net.num_params()) {
    throw ConfigError("initial parameters do not match the network");
  }
  const Planner planner(env, planner_params, net, mean_image);
  Rng planner_rng(seeds.planner);
  Rng policy_rng(seeds.policy);
  GarbState garb(net.num_params(), config.beta);
  garb.baseline_mode = config.baseline_mode;
  garb.baseline_rate = config.baseline_rate;
  AdamState adam(net.num_params());

  TrainResult result;
  const int frame_stack = env.spec().frame_stack;
  for (int episode = 0; episode < config.max_episodes &&
                        result.total_steps < config.max_total_steps;
       ++episode) {
    const auto start = std::chrono::steady_clock::now();
    garb.BeginEpisode();
    SimState state = env.Reset(DeriveSeed(seeds.env, "episode", episode));
    FrameHistory history(frame_stack);
    history.Push(env.Render(state), state.Hash());

    TrainLogRow row;
    row.episode = episode;
    while (row.steps < config.episode_step_cap &&
           result.total_steps < config.max_total_steps) {
      const PlanResult plan = planner.Plan(state, history, &theta, planner_rng);
      const std::vector<double> mu = SoftmaxPolicy(plan.root_q, config.temperature);
      const ActionId action = SampleAction(mu, policy_rng);
      const std::vector<double> delta =
          RewardSensitivities(plan.tape, action, mu, config.temperature);
      const ParamVector grad = LogPolicyGradient(net, theta, plan.tape, delta);

      StepOutcome out = env.Step(state, action);
      GarbStep(garb, grad, out.clipped_reward);
      row.objective_return += out.clipped_reward;
      row.raw_score += out.score_delta;
      ++row.steps;
      ++result.total_steps;
      if (out.planning_terminal()) break;
      state = std::move(out.next_state);
      history.Push(env.Render(state), state.Hash());
    }

    row.learning_rate = LearningRateAt(episode, config);
    row.grad_norm = garb.accumulator.Norm();
    row.update_applied = EndEpisodeUpdate(theta, garb, adam, row.learning_rate);
    row.baseline = garb.baseline;
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    result.log.push_back(row);
    if (on_episode) on_episode(row, theta);
  }
  result.theta = std::move(theta);
  return result;
}

}  // namespace pgrd
