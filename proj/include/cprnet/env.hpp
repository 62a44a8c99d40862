#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cprnet/topology.hpp"

namespace cprnet {

enum class Action : std::uint8_t { Open = 0, Closed = 1 };

constexpr double kUnboundedCapacity = std::numeric_limits<double>::infinity();

// Water-plant CPR game parameters. With all valves open, total_flow units
// leave the reservoir per step (total_flow / n_agents through each pipe);
// the reservoir starts at w0 and refills at regen_rate per step, capped at
// w_max (kUnboundedCapacity disables the cap).
struct EnvConfig {
  int n_agents = 4;
  double w0 = 0.5;
  double total_flow = 0.1;
  double regen_rate = 0.055;
  double w_max = 1.0;
  int max_steps = 1000;
  double alpha = 0.0;  // neighbour-reward weight
  Topology topology = Topology::complete(4);

  double flow_per_agent() const { return total_flow / n_agents; }
  void validate() const;  // throws std::invalid_argument with a description
};

struct Observation {
  double water_level = 0.0;  // w_t clipped to [0, w_max]
  double own_piped = 0.0;
};

struct EnvState {
  double water = 0.0;
  std::vector<double> piped;  // cumulative water delivered per agent
  int t = 0;
  bool depleted = false;
  bool done = false;
};

struct StepResult {
  std::vector<Observation> observations;
  std::vector<double> raw_rewards;       // water delivered this step
  std::vector<double> weighted_rewards;  // raw + alpha * sum over neighbours
  bool done = false;
  bool depleted = false;
};

// out[i] = raw[i] + alpha * sum_{j in N_i} raw[j]
std::vector<double> weighted_rewards(std::span<const double> raw, const Topology& topology,
                                     double alpha);

// Percentage of steps with a closed valve, in [0, 100]. Throws on empty trace.
double restraint_percent(std::span<const Action> trace);

class WaterEnv {
 public:
  WaterEnv(EnvConfig config, std::uint64_t seed);

  std::vector<Observation> reset(std::uint64_t seed);
  std::vector<Observation> reset() { return reset(seed_); }

  // Advances one step. Demand above the remaining water splits the remainder
  // equally over the open valves and ends the episode as depleted.
  // Extraction happens before regeneration; regeneration is skipped on the
  // depletion step. Throws std::logic_error when the episode is already done.
  StepResult step(std::span<const Action> joint_action);

  const EnvConfig& config() const { return config_; }
  const EnvState& state() const { return state_; }
  std::vector<Observation> observations() const;

 private:
  EnvConfig config_;
  EnvState state_;
  std::uint64_t seed_ = 0;
};

// One recorded step of an episode, for CSV traces and social metrics.
struct TraceRow {
  int t = 0;           // 1-based step index
  double water = 0.0;  // reservoir level after the step
  std::vector<Action> actions;
  std::vector<double> raw_rewards;
  std::vector<double> weighted_rewards;
  bool depleted = false;
};

// Header: t,water,action_0..N-1,raw_reward_0..,weighted_reward_0..,depleted
// with action columns encoded 1 = open, 0 = closed.
std::string episode_trace_csv(std::span<const TraceRow> rows, int n_agents);

// Shortest round-trip decimal form of v (the one text form used everywhere
// numbers are persisted).
std::string fmt_double(double v);

}  // namespace cprnet
