#include "cprnet/training.hpp"

#include <cmath>
#include <stdexcept>

#include "cprnet/rng.hpp"

namespace cprnet {

void TrainConfig::validate() const {
  env.validate();
  if (episodes < 0) throw std::invalid_argument("train config: episodes must be >= 0");
  if (rollout < 1) throw std::invalid_argument("train config: rollout length must be >= 1");
  if (hidden < 1) throw std::invalid_argument("train config: hidden size must be >= 1");
  if (msg_dim < 1) throw std::invalid_argument("train config: msg_dim must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("train config: gamma must lie in [0, 1]");
  }
}

Rollout replay_rollout(Graph& g, std::span<AgentModule* const> team, const Topology& topology,
                       const FrozenRollout& frozen) {
  const int n = topology.node_count();
  Rollout out;
  out.agent_steps.assign(static_cast<size_t>(n), {});
  out.bootstrap = frozen.bootstrap;
  for (auto& steps : out.agent_steps) steps.reserve(frozen.steps.size());

  for (const FrozenStep& fs : frozen.steps) {
    const TeamForwardGraph fwd =
        team_actor_forward(g, team, topology, fs.actor_inputs, fs.obs, fs.fps);
    for (int i = 0; i < n; ++i) {
      AgentModule& agent = *team[static_cast<size_t>(i)];
      StepRecord rec;
      rec.action = fs.actions[static_cast<size_t>(i)];
      rec.reward = fs.rewards[static_cast<size_t>(i)];
      rec.terminal = fs.terminal;
      rec.log_prob = g.log_prob(fwd.logits[static_cast<size_t>(i)], rec.action);
      rec.entropy = g.entropy(fwd.logits[static_cast<size_t>(i)]);
      rec.value = critic_forward(g, agent, fs.critic_inputs[static_cast<size_t>(i)]);
      rec.value_num = g.value(rec.value);
      out.agent_steps[static_cast<size_t>(i)].push_back(rec);
    }
  }
  return out;
}

std::vector<double> n_step_returns(std::span<const double> rewards, double gamma,
                                   double bootstrap_value) {
  std::vector<double> returns(rewards.size());
  double acc = bootstrap_value;
  for (int t = static_cast<int>(rewards.size()) - 1; t >= 0; --t) {
    acc = rewards[static_cast<size_t>(t)] + gamma * acc;
    returns[static_cast<size_t>(t)] = acc;
  }
  return returns;
}

A2cLossRefs a2c_losses(Graph& g, const Rollout& rollout, int agent, double gamma,
                       double value_coef, double entropy_coef) {
  const auto& steps = rollout.agent_steps.at(static_cast<size_t>(agent));
  if (steps.empty()) throw std::invalid_argument("a2c losses: empty rollout");

  std::vector<double> rewards;
  rewards.reserve(steps.size());
  for (const StepRecord& s : steps) rewards.push_back(s.reward);
  const double bootstrap =
      steps.back().terminal ? 0.0 : rollout.bootstrap.at(static_cast<size_t>(agent));
  const std::vector<double> returns = n_step_returns(rewards, gamma, bootstrap);

  std::vector<Graph::Ref> logp_refs, value_err_refs, entropy_refs;
  std::vector<double> neg_advantages, ones;
  logp_refs.reserve(steps.size());
  for (size_t t = 0; t < steps.size(); ++t) {
    const double advantage = returns[t] - steps[t].value_num;
    logp_refs.push_back(steps[t].log_prob);
    neg_advantages.push_back(-advantage);
    value_err_refs.push_back(g.squared_error(steps[t].value, returns[t]));
    entropy_refs.push_back(steps[t].entropy);
    ones.push_back(1.0);
  }

  A2cLossRefs refs;
  refs.policy = g.weighted_sum(logp_refs, neg_advantages);
  refs.value = g.weighted_sum(value_err_refs, ones);
  refs.entropy = g.weighted_sum(entropy_refs, ones);
  const std::array<Graph::Ref, 3> parts = {refs.policy, refs.value, refs.entropy};
  const std::array<double, 3> coefs = {1.0, value_coef, -entropy_coef};
  refs.total = g.weighted_sum(parts, coefs);
  return refs;
}

Graph::Ref a2c_total_loss(Graph& g, const Rollout& rollout, double gamma, double value_coef,
                          double entropy_coef) {
  std::vector<Graph::Ref> totals;
  std::vector<double> ones;
  for (size_t i = 0; i < rollout.agent_steps.size(); ++i) {
    totals.push_back(
        a2c_losses(g, rollout, static_cast<int>(i), gamma, value_coef, entropy_coef).total);
    ones.push_back(1.0);
  }
  return g.weighted_sum(totals, ones);
}

void consensus_step(std::span<AgentModule* const> team, const Topology& topology) {
  for (const AgentModule* a : team) {
    if (a->kind() != AlgorithmKind::ConseNet) {
      throw std::logic_error("consensus step: only defined for ConseNet");
    }
  }
  const int n = topology.node_count();
  // Snapshot pre-update values so the averages are simultaneous.
  std::vector<std::vector<Tensor*>> critics(static_cast<size_t>(n));
  std::vector<std::vector<std::vector<double>>> before(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    critics[static_cast<size_t>(i)] = team[static_cast<size_t>(i)]->critic_params();
    for (Tensor* t : critics[static_cast<size_t>(i)]) {
      before[static_cast<size_t>(i)].push_back(t->value);
    }
  }
  for (int i = 0; i < n; ++i) {
    std::vector<int> closed = topology.neighbourhood(i);
    closed.push_back(i);
    const double inv = 1.0 / static_cast<double>(closed.size());
    for (size_t p = 0; p < critics[static_cast<size_t>(i)].size(); ++p) {
      std::vector<double>& dst = critics[static_cast<size_t>(i)][p]->value;
      for (size_t k = 0; k < dst.size(); ++k) {
        double acc = 0.0;
        for (int j : closed) acc += before[static_cast<size_t>(j)][p][k];
        dst[k] = acc * inv;
      }
    }
  }
}

namespace {

struct LiveState {
  std::vector<Observation> obs;
  std::vector<Fingerprint> fps;
  std::vector<Action> last_actions;
};

std::vector<double> make_critic_input(const Topology& topology, AlgorithmKind kind, int i,
                                      std::span<const double> actor_input,
                                      std::span<const Action> all_actions) {
  std::vector<Action> neighbour_actions;
  if (kind != AlgorithmKind::IA2C) {
    for (int j : topology.neighbourhood(i)) {
      neighbour_actions.push_back(all_actions[static_cast<size_t>(j)]);
    }
  }
  return build_critic_input(kind, actor_input, neighbour_actions);
}

}  // namespace

TrainResult train(const TrainConfig& config) {
  config.validate();
  const Topology& topology = config.env.topology;
  const int n = config.env.n_agents;

  std::mt19937_64 rng(mix64(config.seed));

  TrainResult result;
  result.agents.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    result.agents.push_back(
        AgentModule::init(i, config.kind, topology, config.hidden, config.msg_dim, rng));
  }
  std::vector<AgentModule*> team;
  for (AgentModule& a : result.agents) team.push_back(&a);

  const AdamConfig actor_adam{config.actor_lr, 0.9, 0.999, 1e-8};
  const AdamConfig critic_adam{config.critic_lr, 0.9, 0.999, 1e-8};

  WaterEnv env(config.env, config.seed);
  Graph graph;

  for (int ep = 0; ep < config.episodes; ++ep) {
    LiveState live;
    live.obs = env.reset();
    live.fps.assign(static_cast<size_t>(n), kUniformFingerprint);
    live.last_actions.assign(static_cast<size_t>(n), Action::Closed);
    for (AgentModule& a : result.agents) a.fingerprint = kUniformFingerprint;

    std::vector<double> ep_return(static_cast<size_t>(n), 0.0);
    std::vector<std::vector<Action>> ep_actions(static_cast<size_t>(n));

    while (!env.state().done) {
      FrozenRollout frozen;
      frozen.steps.reserve(static_cast<size_t>(config.rollout));

      for (int k = 0; k < config.rollout && !env.state().done; ++k) {
        FrozenStep fs;
        fs.obs = live.obs;
        fs.fps = live.fps;
        fs.actor_inputs.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
          fs.actor_inputs[static_cast<size_t>(i)] =
              actor_input_for(topology, config.kind, i, live.obs, live.fps);
        }

        const std::vector<std::vector<double>> logits = team_actor_logits(
            {team.data(), team.size()}, topology, fs.actor_inputs, live.obs, live.fps);

        std::vector<Action> actions(static_cast<size_t>(n));
        std::vector<Fingerprint> new_fps(static_cast<size_t>(n));
        fs.actions.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
          const ActResult r =
              act(result.agents[static_cast<size_t>(i)], logits[static_cast<size_t>(i)], rng);
          actions[static_cast<size_t>(i)] = r.action;
          new_fps[static_cast<size_t>(i)] = {r.dist.probs[0], r.dist.probs[1]};
          fs.actions[static_cast<size_t>(i)] = static_cast<int>(r.action);
          ep_actions[static_cast<size_t>(i)].push_back(r.action);
        }

        fs.critic_inputs.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
          fs.critic_inputs[static_cast<size_t>(i)] = make_critic_input(
              topology, config.kind, i, fs.actor_inputs[static_cast<size_t>(i)], actions);
        }

        const StepResult sr = env.step(actions);
        fs.rewards = sr.weighted_rewards;
        fs.terminal = sr.done;
        for (int i = 0; i < n; ++i) {
          ep_return[static_cast<size_t>(i)] += sr.weighted_rewards[static_cast<size_t>(i)];
        }

        live.obs = sr.observations;
        live.fps = new_fps;
        live.last_actions = actions;
        frozen.steps.push_back(std::move(fs));
      }

      frozen.bootstrap.assign(static_cast<size_t>(n), 0.0);
      if (!env.state().done) {
        // Bootstrap the tail value at the post-segment state; the critic is
        // conditioned on the most recent executed neighbour actions.
        for (int i = 0; i < n; ++i) {
          const std::vector<double> actor_in =
              actor_input_for(topology, config.kind, i, live.obs, live.fps);
          const std::vector<double> critic_in =
              make_critic_input(topology, config.kind, i, actor_in, live.last_actions);
          frozen.bootstrap[static_cast<size_t>(i)] =
              critic_value(result.agents[static_cast<size_t>(i)], critic_in);
        }
      }

      graph.reset();
      const Rollout rollout = replay_rollout(graph, {team.data(), team.size()}, topology, frozen);
      const Graph::Ref total =
          a2c_total_loss(graph, rollout, config.gamma, config.value_coef, config.entropy_coef);
      for (AgentModule& a : result.agents) a.zero_grads();
      graph.backward(total);

      for (AgentModule& a : result.agents) {
        const std::vector<Tensor*> actor_ps = a.actor_params();
        for (size_t p = 0; p < actor_ps.size(); ++p) {
          adam_step(*actor_ps[p], a.actor_opt[p], actor_adam);
        }
        const std::vector<Tensor*> critic_ps = a.critic_params();
        for (size_t p = 0; p < critic_ps.size(); ++p) {
          adam_step(*critic_ps[p], a.critic_opt[p], critic_adam);
        }
        a.zero_grads();
      }
      if (config.kind == AlgorithmKind::ConseNet) {
        consensus_step({team.data(), team.size()}, topology);
      }
    }

    double mean_return = 0.0;
    double mean_restraint = 0.0;
    for (int i = 0; i < n; ++i) {
      mean_return += ep_return[static_cast<size_t>(i)];
      mean_restraint += restraint_percent(ep_actions[static_cast<size_t>(i)]);
    }
    result.episode_return.push_back(mean_return / n);
    result.episode_restraint.push_back(mean_restraint / n);
    if (ep + 1 == config.episodes) {
      result.final_episode_actions = std::move(ep_actions);
    }
  }

  return result;
}

}  // namespace cprnet
