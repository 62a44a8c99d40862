#include "cprnet/env.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cprnet {

void EnvConfig::validate() const {
  if (n_agents < 1) throw std::invalid_argument("env config: n_agents must be >= 1");
  if (!(w0 > 0.0)) throw std::invalid_argument("env config: w0 must be > 0");
  if (!(total_flow > 0.0)) throw std::invalid_argument("env config: total_flow must be > 0");
  if (regen_rate < 0.0) throw std::invalid_argument("env config: regen_rate must be >= 0");
  if (max_steps < 1) throw std::invalid_argument("env config: max_steps must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("env config: alpha must lie in [0, 1]");
  }
  if (!(w_max > 0.0)) throw std::invalid_argument("env config: w_max must be > 0");
  if (topology.node_count() != n_agents) {
    throw std::invalid_argument("env config: topology node count (" +
                                std::to_string(topology.node_count()) +
                                ") does not match n_agents (" + std::to_string(n_agents) + ")");
  }
}

std::vector<double> weighted_rewards(std::span<const double> raw, const Topology& topology,
                                     double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("weighted_rewards: alpha must lie in [0, 1]");
  }
  if (static_cast<int>(raw.size()) != topology.node_count()) {
    throw std::invalid_argument("weighted_rewards: reward count does not match topology");
  }
  std::vector<double> out(raw.size());
  for (int i = 0; i < topology.node_count(); ++i) {
    double neighbour_sum = 0.0;
    for (int j : topology.neighbourhood(i)) {
      neighbour_sum += raw[static_cast<size_t>(j)];
    }
    out[static_cast<size_t>(i)] = raw[static_cast<size_t>(i)] + alpha * neighbour_sum;
  }
  return out;
}

double restraint_percent(std::span<const Action> trace) {
  if (trace.empty()) throw std::invalid_argument("restraint: empty action trace");
  std::size_t closed = 0;
  for (Action a : trace) {
    if (a == Action::Closed) ++closed;
  }
  return 100.0 * static_cast<double>(closed) / static_cast<double>(trace.size());
}

WaterEnv::WaterEnv(EnvConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  reset(seed);
}

std::vector<Observation> WaterEnv::reset(std::uint64_t seed) {
  seed_ = seed;
  state_.water = config_.w0;
  state_.piped.assign(static_cast<size_t>(config_.n_agents), 0.0);
  state_.t = 0;
  state_.depleted = false;
  state_.done = false;
  return observations();
}

std::vector<Observation> WaterEnv::observations() const {
  std::vector<Observation> obs(static_cast<size_t>(config_.n_agents));
  const double level = std::min(std::max(state_.water, 0.0), config_.w_max);
  for (int i = 0; i < config_.n_agents; ++i) {
    obs[static_cast<size_t>(i)] = {level, state_.piped[static_cast<size_t>(i)]};
  }
  return obs;
}

StepResult WaterEnv::step(std::span<const Action> joint_action) {
  if (state_.done) {
    throw std::logic_error("env step: episode already finished");
  }
  if (static_cast<int>(joint_action.size()) != config_.n_agents) {
    throw std::invalid_argument("env step: joint action arity mismatch");
  }

  int n_open = 0;
  for (Action a : joint_action) {
    if (a == Action::Open) ++n_open;
  }
  const double per_valve = config_.flow_per_agent();
  const double demand = n_open * per_valve;

  StepResult result;
  result.raw_rewards.assign(static_cast<size_t>(config_.n_agents), 0.0);

  if (state_.water >= demand) {
    for (int i = 0; i < config_.n_agents; ++i) {
      if (joint_action[static_cast<size_t>(i)] == Action::Open) {
        result.raw_rewards[static_cast<size_t>(i)] = per_valve;
        state_.piped[static_cast<size_t>(i)] += per_valve;
      }
    }
    state_.water = state_.water - demand + config_.regen_rate;
    if (state_.water > config_.w_max) state_.water = config_.w_max;
    state_.t += 1;
    if (state_.t >= config_.max_steps) state_.done = true;
  } else {
    // Shortfall: split what is left equally over the open valves, no regen.
    const double share = state_.water / n_open;
    for (int i = 0; i < config_.n_agents; ++i) {
      if (joint_action[static_cast<size_t>(i)] == Action::Open) {
        result.raw_rewards[static_cast<size_t>(i)] = share;
        state_.piped[static_cast<size_t>(i)] += share;
      }
    }
    state_.water = 0.0;
    state_.t += 1;
    state_.depleted = true;
    state_.done = true;
  }

  result.weighted_rewards = weighted_rewards(result.raw_rewards, config_.topology, config_.alpha);
  result.observations = observations();
  result.done = state_.done;
  result.depleted = state_.depleted;
  return result;
}

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string episode_trace_csv(std::span<const TraceRow> rows, int n_agents) {
  std::ostringstream out;
  out << "t,water";
  for (int i = 0; i < n_agents; ++i) out << ",action_" << i;
  for (int i = 0; i < n_agents; ++i) out << ",raw_reward_" << i;
  for (int i = 0; i < n_agents; ++i) out << ",weighted_reward_" << i;
  out << ",depleted\n";
  for (const TraceRow& row : rows) {
    out << row.t << ',' << fmt_double(row.water);
    for (int i = 0; i < n_agents; ++i) {
      out << ',' << (row.actions[static_cast<size_t>(i)] == Action::Open ? 1 : 0);
    }
    for (int i = 0; i < n_agents; ++i) {
      out << ',' << fmt_double(row.raw_rewards[static_cast<size_t>(i)]);
    }
    for (int i = 0; i < n_agents; ++i) {
      out << ',' << fmt_double(row.weighted_rewards[static_cast<size_t>(i)]);
    }
    out << ',' << (row.depleted ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace cprnet
