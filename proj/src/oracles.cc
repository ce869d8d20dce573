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

#include "pgrd/oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace pgrd::oracles {
namespace {

double LogSoftmaxAt(const RootValues& q, ActionId chosen, double temperature) {
  double max_z = -std::numeric_limits<double>::infinity();
  for (const auto& v : q) {
    if (v) max_z = std::max(max_z, *v / temperature);
  }
  double sum = 0.0;
  for (const auto& v : q) {
    if (v) sum += std::exp(*v / temperature - max_z);
  }
  return *q.at(chosen) / temperature - max_z - std::log(sum);
}

}  // namespace

TabularMDP TabularFromEnvironment(const Environment& env, double gamma) {
  if (env.spec().family != EnvFamily::kRandomMdp) {
    throw ConfigError("TabularFromEnvironment needs a random_mdp environment");
  }
  const MdpTables& t = env.tables();
  TabularMDP mdp;
  mdp.num_states = t.num_states;
  mdp.num_actions = t.num_actions;
  mdp.transitions = t.next;
  mdp.terminal = t.terminal;
  mdp.gamma = gamma;
  mdp.rewards.assign(t.num_states, std::vector<double>(t.num_actions));
  for (int s = 0; s < t.num_states; ++s) {
    for (int a = 0; a < t.num_actions; ++a) {
      mdp.rewards[s][a] = ClipReward(t.score[s][a]);
    }
  }
  return mdp;
}

QTable DpQ(const TabularMDP& mdp, int horizon) {
  if (horizon < 1) throw ConfigError("DpQ: horizon must be >= 1");
  QTable q(horizon, std::vector<std::vector<double>>(
                        mdp.num_states, std::vector<double>(mdp.num_actions, 0.0)));
  for (int d = horizon - 1; d >= 0; --d) {
    for (int s = 0; s < mdp.num_states; ++s) {
      for (int a = 0; a < mdp.num_actions; ++a) {
        double future = 0.0;
        if (d + 1 < horizon) {
          for (const auto& [next, p] : mdp.transitions[s][a]) {
            if (mdp.terminal[next]) continue;
            const auto& row = q[d + 1][next];
            future += p * *std::max_element(row.begin(), row.end());
          }
        }
        q[d][s][a] = mdp.rewards[s][a] + mdp.gamma * future;
      }
    }
  }
  return q;
}

ParamVector FdLogPolicyGrad(const NetworkSpec& net, const RewardTape& tape,
                            const ParamVector& theta, ActionId chosen,
                            double epsilon, double temperature,
                            std::span<const std::size_t> coordinates) {
  if (!(epsilon > 0.0)) throw UsageError("FdLogPolicyGrad: epsilon must be > 0");
  std::vector<std::size_t> all;
  if (coordinates.empty()) {
    all.resize(theta.size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
    coordinates = all;
  }
  ParamVector grad(theta.size());
  ParamVector probe = theta;
  for (std::size_t k : coordinates) {
    probe[k] = theta[k] + epsilon;
    const double up =
        LogSoftmaxAt(RootQFromTape(tape, net, probe), chosen, temperature);
    probe[k] = theta[k] - epsilon;
    const double down =
        LogSoftmaxAt(RootQFromTape(tape, net, probe), chosen, temperature);
    probe[k] = theta[k];
    grad[k] = (up - down) / (2.0 * epsilon);
  }
  return grad;
}

ParamVector FdNetworkGrad(const NetworkSpec& net, const ParamVector& theta,
                          const Observation& obs,
                          std::span<const double> output_grad, double epsilon) {
  if (!(epsilon > 0.0)) throw UsageError("FdNetworkGrad: epsilon must be > 0");
  auto objective = [&](const ParamVector& p) {
    const std::vector<double> bonus = Forward(net, p, obs).bonus;
    double total = 0.0;
    for (std::size_t a = 0; a < bonus.size(); ++a) total += output_grad[a] * bonus[a];
    return total;
  };
  ParamVector grad(theta.size());
  ParamVector probe = theta;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    probe[k] = theta[k] + epsilon;
    const double up = objective(probe);
    probe[k] = theta[k] - epsilon;
    const double down = objective(probe);
    probe[k] = theta[k];
    grad[k] = (up - down) / (2.0 * epsilon);
  }
  return grad;
}

double RelativeError(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("RelativeError: size mismatch");
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff = std::max(diff, std::abs(a[k] - b[k]));
    scale = std::max({scale, std::abs(a[k]), std::abs(b[k])});
  }
  return scale == 0.0 ? 0.0 : diff / scale;
}

PolicyValueGrad EnumPolicyValueGrad(const OneStepProblem& problem,
                                    const ParamVector& theta, int max_actions) {
  const int num_actions = problem.net.num_outputs();
  if (num_actions > max_actions) {
    throw ConfigError("EnumPolicyValueGrad: action space too large to enumerate");
  }
  if (static_cast<int>(problem.planning_reward.size()) != num_actions ||
      static_cast<int>(problem.expected_return.size()) != num_actions) {
    throw UsageError("EnumPolicyValueGrad: one reward per action needed");
  }
  const ForwardResult fwd = Forward(problem.net, theta, problem.obs);
  std::vector<double> z(num_actions);
  for (int a = 0; a < num_actions; ++a) {
    z[a] = (fwd.bonus[a] + problem.planning_reward[a]) / problem.temperature;
  }
  const double max_z = *std::max_element(z.begin(), z.end());
  double norm = 0.0;
  std::vector<double> mu(num_actions);
  for (int a = 0; a < num_actions; ++a) norm += mu[a] = std::exp(z[a] - max_z);
  for (double& p : mu) p /= norm;

  PolicyValueGrad out;
  for (int a = 0; a < num_actions; ++a) out.value += mu[a] * problem.expected_return[a];
  // dU/dQ_b = mu_b (E_b - U) / T
  std::vector<double> d_value(num_actions);
  for (int b = 0; b < num_actions; ++b) {
    d_value[b] = mu[b] * (problem.expected_return[b] - out.value) / problem.temperature;
  }
  out.grad = Backward(problem.net, theta, fwd.cache, d_value);
  return out;
}

PlainUctResult PlainUct(const Environment& env, const SimState& root,
                        const PlannerParams& params, Rng& rng) {
  struct Stats {
    int n = 0;
    std::vector<int> na;
    std::vector<double> sum;
  };
  const int num_actions = env.num_actions();
  std::map<std::pair<std::uint64_t, int>, Stats> tree;
  PlainUctResult result;
  std::uint64_t trace = HashCombine(0x7ace, root.Hash());

  auto draw = [&](std::size_t n) {
    const std::size_t pick = rng.Index(n);
    trace = HashCombine(HashCombine(trace, n), pick);
    return pick;
  };

  for (int i = 0; i < params.n_trajectories; ++i) {
    SimState s = root;
    std::vector<Stats*> visited;
    std::vector<ActionId> taken;
    std::vector<double> rewards;
    auto& log = result.trajectories.emplace_back();
    for (int d = 0; d < params.max_depth; ++d) {
      Stats& node = tree[{s.Hash(), d}];
      if (node.na.empty()) {
        node.na.assign(num_actions, 0);
        node.sum.assign(num_actions, 0.0);
      }
      std::vector<ActionId> options;
      for (ActionId a = 0; a < num_actions; ++a) {
        if (node.na[a] == 0) options.push_back(a);
      }
      if (options.empty()) {
        std::vector<double> score(num_actions);
        for (ActionId a = 0; a < num_actions; ++a) {
          score[a] = node.sum[a] / node.na[a] +
                     params.exploration *
                         std::sqrt(std::log(static_cast<double>(node.n)) / node.na[a]);
        }
        const double best = *std::max_element(score.begin(), score.end());
        for (ActionId a = 0; a < num_actions; ++a) {
          if (score[a] == best) options.push_back(a);
        }
      }
      const ActionId a = options.size() == 1 ? options[0] : options[draw(options.size())];
      log.emplace_back(s.Hash(), a);
      const StepOutcome out = env.Step(s, a);
      visited.push_back(&node);
      taken.push_back(a);
      rewards.push_back(out.clipped_reward);
      if (out.life_lost || out.game_over) break;
      s = out.next_state;
    }
    double g = 0.0;
    for (std::size_t k = visited.size(); k-- > 0;) {
      g = rewards[k] + params.gamma * g;
      visited[k]->n += 1;
      visited[k]->na[taken[k]] += 1;
      visited[k]->sum[taken[k]] += g;
    }
  }
  const Stats& r = tree.at({root.Hash(), 0});
  result.root_q.resize(num_actions);
  for (ActionId a = 0; a < num_actions; ++a) {
    if (r.na[a] > 0) result.root_q[a] = r.sum[a] / r.na[a];
  }
  result.rng_trace_id = trace;
  return result;
}

RewardTape SyntheticTape(const NetworkSpec& net, const ParamVector& theta,
                         int num_actions, int max_entries, double gamma,
                         Rng& rng) {
  if (net.num_outputs() != num_actions) {
    throw UsageError("SyntheticTape: network output count != num_actions");
  }
  if (max_entries < 1) throw UsageError("SyntheticTape: max_entries must be >= 1");
  RewardTape tape;
  tape.gamma = gamma;
  tape.num_actions = num_actions;
  tape.root_counts.assign(num_actions, 0);

  const Shape3& in = net.input_shape();
  const int num_obs = 1 + static_cast<int>(rng.Index(6));
  std::vector<std::vector<double>> bonus;
  for (int j = 0; j < num_obs; ++j) {
    Observation obs{in.channels, in.height, in.width,
                    std::vector<double>(in.size())};
    for (double& v : obs.data) v = rng.Normal(0.0, 1.0);
    ForwardResult fwd = Forward(net, theta, obs);
    tape.observations.push_back(std::move(obs));
    tape.caches.push_back(std::move(fwd.cache));
    bonus.push_back(std::move(fwd.bonus));
  }

  const int target = 1 + static_cast<int>(rng.Index(max_entries));
  int traj = 0;
  while (static_cast<int>(tape.entries.size()) < target) {
    const int remaining = target - static_cast<int>(tape.entries.size());
    const int length = 1 + static_cast<int>(rng.Index(std::min(remaining, 8)));
    const auto root_action = static_cast<ActionId>(rng.Index(num_actions));
    tape.root_actions.push_back(root_action);
    ++tape.root_counts[root_action];
    for (int h = 0; h < length; ++h) {
      TapeEntry e;
      e.trajectory = traj;
      e.depth = h;
      e.action = h == 0 ? root_action : static_cast<ActionId>(rng.Index(num_actions));
      e.eval_index = static_cast<int>(rng.Index(num_obs));
      e.state_hash = HashCombine(static_cast<std::uint64_t>(e.eval_index), h);
      e.bonus = bonus[e.eval_index][e.action];
      e.objective_reward = static_cast<double>(rng.Index(3)) - 1.0;
      tape.entries.push_back(e);
    }
    ++traj;
  }
  return tape;
}

NetworkSpec RandomSmallNetwork(Rng& rng, int num_actions,
                               std::size_t max_params) {
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng.Index(hi - lo + 1)); };
  while (true) {
    const Shape3 input{pick(1, 3), pick(3, 8), pick(3, 8)};
    std::vector<LayerSpec> layers;
    int h = input.height;
    int w = input.width;
    const int convs = pick(0, 2);
    for (int c = 0; c < convs; ++c) {
      const int k = pick(1, std::min({3, h, w}));
      const int stride = pick(1, 2);
      layers.emplace_back(ConvLayer{pick(1, 4), k, pick(1, std::min(3, w)), stride});
      const auto& conv = std::get<ConvLayer>(layers.back());
      h = (h - conv.kernel_h) / stride + 1;
      w = (w - conv.kernel_w) / stride + 1;
      if (rng.Uniform() < 0.8) layers.emplace_back(RectifierLayer{});
    }
    if (convs == 0 || rng.Uniform() < 0.6) {
      layers.emplace_back(DenseLayer{pick(2, 10)});
      layers.emplace_back(RectifierLayer{});
    }
    layers.emplace_back(DenseLayer{num_actions});
    NetworkSpec net(input, std::move(layers));
    if (net.num_params() <= max_params) return net;
  }
}

ParamVector RandomParams(const NetworkSpec& net, Rng& rng) {
  ParamVector params = InitParams(net, rng);
  for (const auto& info : net.layer_info()) {
    for (std::size_t k = 0; k < info.bias_count; ++k) {
      params[info.param_offset + info.weight_count + k] = rng.Normal(0.0, 0.1);
    }
  }
  const auto& out = net.layer_info().back();
  const double stddev = 1.0 / std::sqrt(static_cast<double>(out.fan_in));
  for (std::size_t k = 0; k < out.weight_count; ++k) {
    params[out.param_offset + k] = rng.Normal(0.0, stddev);
  }
  return params;
}

}  // namespace pgrd::oracles
