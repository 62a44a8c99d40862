#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "cprnet/agents.hpp"
#include "cprnet/env.hpp"
#include "cprnet/graph.hpp"

namespace cprnet {

struct TrainConfig {
  AlgorithmKind kind = AlgorithmKind::IA2C;
  EnvConfig env;
  std::uint64_t seed = 0;
  int episodes = 2000;
  int rollout = 20;  // update every n steps (or at episode end)
  int hidden = 64;
  int msg_dim = 8;
  double gamma = 0.99;
  double actor_lr = 5e-4;
  double critic_lr = 2.5e-4;
  double value_coef = 0.5;
  double entropy_coef = 0.01;

  void validate() const;
};

// Recorded data for one update segment: everything the loss needs except
// the parameter-dependent forward passes, which are rebuilt at update time.
struct FrozenStep {
  std::vector<std::vector<double>> actor_inputs;  // per agent, layout-complete
  std::vector<std::vector<double>> critic_inputs;
  std::vector<Observation> obs;        // message-path inputs (NeurComm)
  std::vector<Fingerprint> fps;        // previous-step distributions
  std::vector<int> actions;
  std::vector<double> rewards;         // connectivity-weighted
  bool terminal = false;               // episode ended at this step
};

struct FrozenRollout {
  std::vector<FrozenStep> steps;
  std::vector<double> bootstrap;  // per agent; 0 when the episode ended
};

// Graph-side view of a replayed rollout: per-agent per-step loss ingredients.
struct StepRecord {
  int action = 0;
  double reward = 0.0;
  bool terminal = false;
  Graph::Ref log_prob = -1;
  Graph::Ref entropy = -1;
  Graph::Ref value = -1;
  double value_num = 0.0;
};

struct Rollout {
  std::vector<std::vector<StepRecord>> agent_steps;  // [agent][step]
  std::vector<double> bootstrap;
};

// Rebuilds the joint differentiable graph (messages included) over a frozen
// segment. The same builder backs training updates and gradient checks.
Rollout replay_rollout(Graph& g, std::span<AgentModule* const> team, const Topology& topology,
                       const FrozenRollout& frozen);

// n-step returns: R_t = sum_k gamma^k r_{t+k} + gamma^{n-t} * bootstrap.
std::vector<double> n_step_returns(std::span<const double> rewards, double gamma,
                                   double bootstrap_value);

struct A2cLossRefs {
  Graph::Ref policy = -1;
  Graph::Ref value = -1;
  Graph::Ref entropy = -1;
  Graph::Ref total = -1;
};

// total = -sum_t logpi(a_t) * A_t + value_coef * sum_t (R_t - v_t)^2
//         - entropy_coef * sum_t H_t, with A_t = R_t - v_t held constant in
// the policy term.
A2cLossRefs a2c_losses(Graph& g, const Rollout& rollout, int agent, double gamma,
                       double value_coef, double entropy_coef);

// Sum of all agents' totals; one backward through the joint graph.
Graph::Ref a2c_total_loss(Graph& g, const Rollout& rollout, double gamma, double value_coef,
                          double entropy_coef);

// Replaces every critic parameter by the uniform average over the agent's
// closed neighbourhood, all computed from pre-call values. ConseNet only.
void consensus_step(std::span<AgentModule* const> team, const Topology& topology);

struct TrainResult {
  std::vector<AgentModule> agents;
  std::vector<double> episode_return;     // mean over agents, weighted
  std::vector<double> episode_restraint;  // mean over agents, percent
  std::vector<std::vector<Action>> final_episode_actions;  // per agent
};

TrainResult train(const TrainConfig& config);

}  // namespace cprnet
