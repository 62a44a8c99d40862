#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cprnet/env.hpp"
#include "cprnet/rng.hpp"

using namespace cprnet;

namespace {

EnvConfig default_config() {
  EnvConfig cfg;
  cfg.regen_rate = 0.055;
  return cfg;
}

std::vector<Action> all_open(int n) { return std::vector<Action>(static_cast<size_t>(n), Action::Open); }
std::vector<Action> all_closed(int n) {
  return std::vector<Action>(static_cast<size_t>(n), Action::Closed);
}

// Independent step oracle: literal per-step recurrence over open counts,
// kept separate from WaterEnv.
struct OracleOutcome {
  std::vector<double> water_after;  // per step
  std::vector<double> piped;        // per agent, final
  int depletion_step = -1;          // 1-based, -1 if none
};

OracleOutcome simulate_oracle(double w0, double c, double w_max, int n_agents, int max_steps,
                              const std::vector<std::vector<Action>>& actions_per_step) {
  OracleOutcome out;
  out.piped.assign(static_cast<size_t>(n_agents), 0.0);
  double water = w0;
  const double per_valve = 0.1 / n_agents;
  for (int t = 0; t < max_steps && t < static_cast<int>(actions_per_step.size()); ++t) {
    int open = 0;
    for (Action a : actions_per_step[static_cast<size_t>(t)]) {
      if (a == Action::Open) ++open;
    }
    const double demand = open * per_valve;
    if (water >= demand) {
      for (int i = 0; i < n_agents; ++i) {
        if (actions_per_step[static_cast<size_t>(t)][static_cast<size_t>(i)] == Action::Open) {
          out.piped[static_cast<size_t>(i)] += per_valve;
        }
      }
      water = water - demand + c;
      if (water > w_max) water = w_max;
      out.water_after.push_back(water);
    } else {
      const double share = water / open;
      for (int i = 0; i < n_agents; ++i) {
        if (actions_per_step[static_cast<size_t>(t)][static_cast<size_t>(i)] == Action::Open) {
          out.piped[static_cast<size_t>(i)] += share;
        }
      }
      water = 0.0;
      out.water_after.push_back(water);
      out.depletion_step = t + 1;
      break;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("neighbourhoods for the presets") {
  const Topology k4 = Topology::complete(4);
  CHECK(k4.neighbourhood(0) == std::vector<int>{1, 2, 3});
  const Topology none = Topology::disconnected(4);
  CHECK(none.neighbourhood(2).empty());
  const Topology ring = Topology::ring(4);
  CHECK(ring.neighbourhood(2) == std::vector<int>{1, 3});
  const Topology line = Topology::line(4);
  CHECK(line.neighbourhood(0) == std::vector<int>{1});
  CHECK(line.neighbourhood(1) == std::vector<int>{0, 2});
  CHECK_THROWS_AS(k4.neighbourhood(4), std::out_of_range);
  CHECK_THROWS_AS(k4.neighbourhood(-1), std::out_of_range);
}

TEST_CASE("topology rejects self-loops and duplicates") {
  CHECK_THROWS_AS(Topology(3, {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Topology(3, {{0, 1}, {1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Topology(3, {{0, 3}}), std::invalid_argument);
  CHECK(Topology::complete(4).is_regular());
  CHECK(Topology::ring(5).is_regular());
  CHECK_FALSE(Topology::line(4).is_regular());
}

TEST_CASE("reset gives the initial reservoir and zeroed pipes") {
  WaterEnv env(default_config(), 7);
  const auto obs = env.reset(7);
  CHECK(env.state().water == 0.5);
  CHECK(env.state().t == 0);
  CHECK_FALSE(env.state().done);
  for (const Observation& o : obs) {
    CHECK(o.water_level == 0.5);
    CHECK(o.own_piped == 0.0);
  }
}

TEST_CASE("invalid configs are rejected with a message") {
  EnvConfig cfg = default_config();
  cfg.w0 = 0.0;
  CHECK_THROWS_AS(WaterEnv(cfg, 0), std::invalid_argument);
  cfg = default_config();
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(WaterEnv(cfg, 0), std::invalid_argument);
  cfg = default_config();
  cfg.max_steps = 0;
  CHECK_THROWS_AS(WaterEnv(cfg, 0), std::invalid_argument);
  cfg = default_config();
  cfg.topology = Topology::complete(3);
  CHECK_THROWS_AS(WaterEnv(cfg, 0), std::invalid_argument);
}

TEST_CASE("same seed resets identically") {
  WaterEnv a(default_config(), 42);
  WaterEnv b(default_config(), 42);
  const auto adv = all_open(4);
  a.step(adv);
  a.reset(42);
  CHECK(a.state().water == b.state().water);
  CHECK(a.state().t == b.state().t);
  CHECK(a.state().piped == b.state().piped);
}

TEST_CASE("one step of full extraction") {
  WaterEnv env(default_config(), 0);
  const StepResult sr = env.step(all_open(4));
  for (double r : sr.raw_rewards) CHECK(r == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(env.state().water == doctest::Approx(0.455).epsilon(1e-12));
  CHECK_FALSE(sr.done);
}

TEST_CASE("all closed only regenerates") {
  WaterEnv env(default_config(), 0);
  const StepResult sr = env.step(all_closed(4));
  for (double r : sr.raw_rewards) CHECK(r == 0.0);
  CHECK(env.state().water == doctest::Approx(0.555).epsilon(1e-12));
}

TEST_CASE("depletion trajectory matches the step oracle exactly") {
  EnvConfig cfg = default_config();
  cfg.regen_rate = 0.03;
  cfg.w_max = kUnboundedCapacity;
  WaterEnv env(cfg, 0);

  std::vector<std::vector<Action>> plan(20, all_open(4));
  const OracleOutcome oracle = simulate_oracle(0.5, 0.03, kUnboundedCapacity, 4, 20, plan);

  const double expected_water[6] = {0.43, 0.36, 0.29, 0.22, 0.15, 0.08};
  for (int t = 0; t < 6; ++t) {
    const StepResult sr = env.step(all_open(4));
    CHECK(env.state().water == oracle.water_after[static_cast<size_t>(t)]);
    CHECK(env.state().water == doctest::Approx(expected_water[t]).epsilon(1e-9));
    CHECK_FALSE(sr.depleted);
  }
  const StepResult last = env.step(all_open(4));
  CHECK(last.depleted);
  CHECK(env.state().t == 7);
  CHECK(oracle.depletion_step == 7);
  for (double r : last.raw_rewards) CHECK(r == doctest::Approx(0.02).epsilon(1e-12));
  for (int i = 0; i < 4; ++i) {
    CHECK(env.state().piped[static_cast<size_t>(i)] == oracle.piped[static_cast<size_t>(i)]);
    CHECK(env.state().piped[static_cast<size_t>(i)] == doctest::Approx(0.17).epsilon(1e-12));
  }
  CHECK_THROWS_AS(env.step(all_open(4)), std::logic_error);
}

TEST_CASE("weighted rewards") {
  const Topology k4 = Topology::complete(4);
  const std::vector<double> raw = {0.025, 0.025, 0.025, 0.0};

  SUBCASE("alpha 0 is the identity") {
    CHECK(weighted_rewards(raw, k4, 0.0) == raw);
  }
  SUBCASE("alpha 1 on the complete graph is the global sum") {
    const auto out = weighted_rewards(raw, k4, 1.0);
    for (double v : out) CHECK(v == doctest::Approx(0.075).epsilon(1e-12));
  }
  SUBCASE("alpha 0.1 worked example") {
    const auto out = weighted_rewards(raw, k4, 0.1);
    CHECK(out[0] == doctest::Approx(0.025 + 0.1 * 0.05).epsilon(1e-12));
  }
  SUBCASE("alpha out of range") {
    CHECK_THROWS_AS(weighted_rewards(raw, k4, 1.5), std::invalid_argument);
  }
}

TEST_CASE("restraint percentages") {
  std::vector<Action> trace(100, Action::Open);
  for (int i = 0; i < 40; ++i) trace[static_cast<size_t>(i)] = Action::Closed;
  CHECK(restraint_percent(trace) == doctest::Approx(40.0));
  CHECK(restraint_percent(std::vector<Action>(10, Action::Open)) == 0.0);
  CHECK(restraint_percent(std::vector<Action>(10, Action::Closed)) == 100.0);
  CHECK_THROWS_AS(restraint_percent(std::vector<Action>{}), std::invalid_argument);
}

TEST_CASE("conservation holds over random runs without a cap") {
  std::mt19937_64 rng(123);
  for (int run = 0; run < 50; ++run) {
    EnvConfig cfg = default_config();
    cfg.regen_rate = uniform_range(rng, 0.0, 0.12);
    cfg.w0 = uniform_range(rng, 0.1, 2.0);
    cfg.w_max = kUnboundedCapacity;
    cfg.max_steps = 200;
    WaterEnv env(cfg, run);

    double extracted = 0.0;
    int t = 0;
    while (!env.state().done) {
      std::vector<Action> joint(4);
      for (auto& a : joint) a = uniform01(rng) < 0.5 ? Action::Open : Action::Closed;
      const StepResult sr = env.step(joint);
      for (double r : sr.raw_rewards) extracted += r;
      ++t;
      if (sr.depleted) break;
      const double predicted = cfg.w0 + cfg.regen_rate * t - extracted;
      REQUIRE(std::abs(env.state().water - predicted) < 1e-9);
      REQUIRE(env.state().water >= 0.0);
    }
  }
}

TEST_CASE("sustainability threshold: c = total_flow sustains full extraction") {
  EnvConfig cfg = default_config();
  cfg.regen_rate = 0.1;
  cfg.max_steps = 500;
  WaterEnv env(cfg, 0);
  int steps = 0;
  while (!env.state().done) {
    const StepResult sr = env.step(all_open(4));
    ++steps;
    REQUIRE_FALSE(sr.depleted);
  }
  CHECK(steps == 500);

  cfg.regen_rate = 0.09;
  WaterEnv depleting(cfg, 0);
  bool depleted = false;
  while (!depleting.state().done) {
    depleted = depleting.step(all_open(4)).depleted;
  }
  CHECK(depleted);
}

TEST_CASE("constant-fraction policies survive iff extraction stays within regen") {
  // Two valves open per step: extraction 0.05 per step.
  EnvConfig cfg = default_config();
  cfg.w_max = kUnboundedCapacity;
  cfg.max_steps = 300;

  auto run_with_two_open = [&](double c) {
    cfg.regen_rate = c;
    WaterEnv env(cfg, 0);
    while (!env.state().done) {
      env.step(std::vector<Action>{Action::Open, Action::Open, Action::Closed, Action::Closed});
    }
    return env.state().depleted;
  };
  CHECK_FALSE(run_with_two_open(0.05));
  CHECK(run_with_two_open(0.049));
}

TEST_CASE("capacity cap bounds the observation") {
  EnvConfig cfg = default_config();
  cfg.regen_rate = 0.1;
  cfg.w_max = 1.0;
  WaterEnv env(cfg, 0);
  for (int t = 0; t < 20; ++t) env.step(all_closed(4));
  CHECK(env.state().water == 1.0);
}

TEST_CASE("episode trace CSV layout") {
  EnvConfig cfg = default_config();
  WaterEnv env(cfg, 0);
  std::vector<TraceRow> rows;
  const auto joint = all_open(4);
  const StepResult sr = env.step(joint);
  TraceRow row;
  row.t = env.state().t;
  row.water = env.state().water;
  row.actions = joint;
  row.raw_rewards = sr.raw_rewards;
  row.weighted_rewards = sr.weighted_rewards;
  row.depleted = sr.depleted;
  rows.push_back(row);

  const std::string csv = episode_trace_csv(rows, 4);
  CHECK(csv.find("t,water,action_0,action_1,action_2,action_3,raw_reward_0,raw_reward_1,"
                 "raw_reward_2,raw_reward_3,weighted_reward_0,weighted_reward_1,"
                 "weighted_reward_2,weighted_reward_3,depleted\n") == 0);
  CHECK(csv.find("1,0.455,1,1,1,1,") != std::string::npos);
}

TEST_CASE("deterministic step results for a fixed action sequence") {
  EnvConfig cfg = default_config();
  auto run = [&]() {
    WaterEnv env(cfg, 9);
    std::mt19937_64 rng(9);
    std::vector<double> trail;
    while (!env.state().done) {
      std::vector<Action> joint(4);
      for (auto& a : joint) a = uniform01(rng) < 0.4 ? Action::Open : Action::Closed;
      const StepResult sr = env.step(joint);
      trail.push_back(env.state().water);
      for (double r : sr.weighted_rewards) trail.push_back(r);
    }
    return trail;
  };
  CHECK(run() == run());
}
