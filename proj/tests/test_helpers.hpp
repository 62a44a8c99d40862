#pragma once

#include <random>
#include <vector>

#include "cprnet/agents.hpp"
#include "cprnet/env.hpp"
#include "cprnet/training.hpp"

namespace cprnet::testing {

inline std::vector<AgentModule> make_team(AlgorithmKind kind, const Topology& topology,
                                          int hidden, int msg_dim, std::mt19937_64& rng) {
  std::vector<AgentModule> team;
  team.reserve(static_cast<size_t>(topology.node_count()));
  for (int i = 0; i < topology.node_count(); ++i) {
    team.push_back(AgentModule::init(i, kind, topology, hidden, msg_dim, rng));
  }
  return team;
}

inline std::vector<AgentModule*> team_ptrs(std::vector<AgentModule>& team) {
  std::vector<AgentModule*> ptrs;
  for (AgentModule& a : team) ptrs.push_back(&a);
  return ptrs;
}

inline std::vector<const AgentModule*> team_cptrs(const std::vector<AgentModule>& team) {
  std::vector<const AgentModule*> ptrs;
  for (const AgentModule& a : team) ptrs.push_back(&a);
  return ptrs;
}

// Plays `steps` live env steps with sampled actions and freezes everything
// the update needs; the rollout is then a fixed function of the parameters.
inline FrozenRollout record_frozen_rollout(std::vector<AgentModule>& team,
                                           const EnvConfig& env_config, int steps,
                                           std::mt19937_64& rng) {
  const Topology& topology = env_config.topology;
  const int n = env_config.n_agents;
  const AlgorithmKind kind = team.front().kind();

  WaterEnv env(env_config, 0);
  std::vector<Observation> obs = env.reset();
  std::vector<Fingerprint> fps(static_cast<size_t>(n), kUniformFingerprint);
  std::vector<Action> last_actions(static_cast<size_t>(n), Action::Closed);

  FrozenRollout frozen;
  for (int k = 0; k < steps && !env.state().done; ++k) {
    FrozenStep fs;
    fs.obs = obs;
    fs.fps = fps;
    fs.actor_inputs.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      fs.actor_inputs[static_cast<size_t>(i)] = actor_input_for(topology, kind, i, obs, fps);
    }
    const auto cteam = team_cptrs(team);
    const auto logits =
        team_actor_logits({cteam.data(), cteam.size()}, topology, fs.actor_inputs, obs, fps);

    std::vector<Action> actions(static_cast<size_t>(n));
    fs.actions.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      const Categorical dist = Categorical::from_logits(logits[static_cast<size_t>(i)]);
      const int a = dist.sample(rng);
      actions[static_cast<size_t>(i)] = static_cast<Action>(a);
      fs.actions[static_cast<size_t>(i)] = a;
      fps[static_cast<size_t>(i)] = {dist.probs[0], dist.probs[1]};
    }
    fs.critic_inputs.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      std::vector<Action> neighbour_actions;
      if (kind != AlgorithmKind::IA2C) {
        for (int j : topology.neighbourhood(i)) {
          neighbour_actions.push_back(actions[static_cast<size_t>(j)]);
        }
      }
      fs.critic_inputs[static_cast<size_t>(i)] =
          build_critic_input(kind, fs.actor_inputs[static_cast<size_t>(i)], neighbour_actions);
    }

    const StepResult sr = env.step(actions);
    fs.rewards = sr.weighted_rewards;
    fs.terminal = sr.done;
    obs = sr.observations;
    last_actions = actions;
    frozen.steps.push_back(std::move(fs));
  }

  frozen.bootstrap.assign(static_cast<size_t>(n), 0.0);
  if (!env.state().done) {
    for (int i = 0; i < n; ++i) {
      const std::vector<double> actor_in = actor_input_for(topology, kind, i, obs, fps);
      std::vector<Action> neighbour_actions;
      if (kind != AlgorithmKind::IA2C) {
        for (int j : topology.neighbourhood(i)) {
          neighbour_actions.push_back(last_actions[static_cast<size_t>(j)]);
        }
      }
      frozen.bootstrap[static_cast<size_t>(i)] = critic_value(
          team[static_cast<size_t>(i)], build_critic_input(kind, actor_in, neighbour_actions));
    }
  }
  return frozen;
}

inline double joint_loss_value(std::vector<AgentModule>& team, const Topology& topology,
                               const FrozenRollout& frozen, double gamma, double value_coef,
                               double entropy_coef) {
  Graph g;
  const auto ptrs = team_ptrs(team);
  const Rollout rollout = replay_rollout(g, {ptrs.data(), ptrs.size()}, topology, frozen);
  return g.value(a2c_total_loss(g, rollout, gamma, value_coef, entropy_coef));
}

inline void joint_loss_grads(std::vector<AgentModule>& team, const Topology& topology,
                             const FrozenRollout& frozen, double gamma, double value_coef,
                             double entropy_coef) {
  for (AgentModule& a : team) a.zero_grads();
  Graph g;
  const auto ptrs = team_ptrs(team);
  const Rollout rollout = replay_rollout(g, {ptrs.data(), ptrs.size()}, topology, frozen);
  g.backward(a2c_total_loss(g, rollout, gamma, value_coef, entropy_coef));
}

}  // namespace cprnet::testing
