#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cprnet/agents.hpp"
#include "cprnet/env.hpp"

namespace cprnet {

enum class PolicyLabel { Cooperate, Defect, Unlabeled };

const char* to_string(PolicyLabel label);
PolicyLabel label_from_string(std::string_view name);

// restraint < lo -> Defect, restraint > hi -> Cooperate, otherwise Unlabeled
// (excluded from meta-game pools).
PolicyLabel label_policy(double restraint, double lo = 25.0, double hi = 35.0);

// A frozen trained team with its training provenance. restraint/labels are
// per agent and filled in by the labelling evaluation.
struct PolicySnapshot {
  AlgorithmKind kind = AlgorithmKind::IA2C;
  double rate = 0.0;   // training regeneration rate
  double alpha = 0.0;
  std::uint64_t seed = 0;  // seed index within the experiment cell
  int episodes = 0;
  int hidden = 64;
  int msg_dim = 8;
  std::string config_hash;
  EnvConfig train_env;
  std::vector<AgentModule> agents;
  std::vector<double> restraint;     // percent, from the labelling environment
  std::vector<PolicyLabel> labels;

  bool evaluated() const { return !restraint.empty(); }
};

// Fixed open/close rules used as oracles and pool stand-ins in tests.
struct ScriptedPolicy {
  enum class Rule { AlwaysOpen, AlwaysClosed, OpenEveryOther, CloseAbovePiped };
  Rule rule = Rule::AlwaysOpen;
  double piped_threshold = 1.0;

  Action decide(const Observation& obs, int t) const;  // t is 0-based
};

struct TeamMember {
  const AgentModule* module = nullptr;
  std::optional<ScriptedPolicy> script;
};

struct EvalOptions {
  bool greedy = true;
  bool record_trace = false;
};

struct EvalEpisode {
  std::vector<double> weighted_return;
  std::vector<double> raw_return;
  std::vector<double> restraint;              // percent per agent
  std::vector<std::vector<double>> step_raw;  // [step][agent]
  int length = 0;
  bool depleted = false;
  std::vector<TraceRow> trace;  // only when record_trace
};

EvalEpisode run_team_episode(std::span<const TeamMember> team, const EnvConfig& env_config,
                             const EvalOptions& options, std::mt19937_64& rng);

// Mean per-agent restraint of the snapshot's team over `episodes` runs of the
// evaluation environment (greedy action selection by default).
std::vector<double> measure_restraint(const PolicySnapshot& snapshot, const EnvConfig& eval_env,
                                      int episodes, std::mt19937_64& rng,
                                      const EvalOptions& options = {});

// A labelled pool entry: one trained agent of one snapshot, or a script.
struct PoolMember {
  const PolicySnapshot* snapshot = nullptr;
  int agent = 0;
  std::optional<ScriptedPolicy> script;

  TeamMember as_team_member() const;
};

struct RolePools {
  std::vector<PoolMember> cooperate;
  std::vector<PoolMember> defect;
  int unlabeled = 0;  // excluded members, for coverage reporting
};

RolePools build_pools(std::span<const PolicySnapshot* const> snapshots);

// Raised when a configuration needs a role whose pool is empty; callers
// report it as a coverage gap rather than fabricating data.
struct pool_gap_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigurationSamples {
  std::vector<double> cooperate;
  std::vector<double> defect;
};

// Samples x cooperators and N-x defectors with replacement, assigns them to
// valve positions uniformly at random, plays one evaluation episode per draw
// and records each agent's undiscounted return under its role.
ConfigurationSamples evaluate_configuration(const RolePools& pools, int x,
                                            const EnvConfig& eval_env, int episodes,
                                            std::mt19937_64& rng, const EvalOptions& options = {},
                                            bool weighted_payoff = true);

enum class Parameterisation { TotalCooperators, OtherCooperators };

struct MetaCell {
  std::vector<double> samples;
  bool feasible = true;

  bool has_data() const { return !samples.empty(); }
  double mean() const;
};

// Empirical meta-game payoffs. In the total parameterisation the index is
// the total cooperator count x in 0..N (R_c infeasible at 0, R_d at N); in
// the other-cooperators parameterisation the index k runs over 0..N-1.
struct MetaGameTable {
  int n_agents = 0;
  Parameterisation param = Parameterisation::TotalCooperators;
  std::vector<MetaCell> coop;
  std::vector<MetaCell> defect;

  double r_c(int x) const;
  double r_d(int x) const;
  double r_avg(int x) const;  // (x*r_c + (N-x)*r_d)/N, total parameterisation
  bool complete() const;      // every feasible cell has samples
  std::vector<std::string> gaps() const;
};

MetaGameTable build_meta_table(int n_agents, std::span<const ConfigurationSamples> per_x);

// Index shift between the two Schelling x-axes; an involution on the data.
MetaGameTable reparameterise(const MetaGameTable& table);

struct SSDReport {
  double c1 = 0.0;  // R_c(N) - R_d(0)
  double c2 = 0.0;  // R_c(N) - R_c(1)
  double c3 = 0.0;  // max over n in [c3_lo, c3_hi] of R_d(n-1) - R_c(n)
  int c3_lo = 1;
  int c3_hi = 0;
  bool is_ssd = false;
};

SSDReport ssd_indicator(const MetaGameTable& table);

struct EquilibriumSet {
  struct Margin {
    int x = 0;
    double coop_stay = 0.0;    // R_c(x) - R_d(x-1); +inf when x = 0
    double defect_stay = 0.0;  // R_d(x) - R_c(x+1); +inf when x = N
  };
  std::vector<int> equilibria;  // ascending x
  std::vector<Margin> margins;  // one per x in 0..N
};

// x is a meta-game Nash equilibrium iff no unilateral role switch strictly
// profits (weak inequalities).
EquilibriumSet find_equilibria(const MetaGameTable& table);

struct SocialMetrics {
  double utilitarian = 0.0;
  double equality = 0.0;
  double sustainability = 0.0;
};

// Gini = sum_ij |x_i - x_j| / (2 n sum_i x_i); defined as 0 when the total
// is 0 so that equality over all-zero returns is 1.
double gini(std::span<const double> values);

SocialMetrics social_metrics(std::span<const EvalEpisode> episodes, int horizon);

struct HeatmapCell {
  double mean_restraint = 0.0;
  int n_seeds = 0;
  bool missing = true;
};

struct Heatmap {
  std::vector<AlgorithmKind> kinds;
  std::vector<double> rates;
  double alpha = 0.0;
  std::vector<std::vector<HeatmapCell>> cells;  // [kind][rate]
};

// Mean restraint over seeds and agents per (kind, rate), measured in each
// snapshot's training-rate environment truncated to eval_steps.
Heatmap restraint_heatmap(std::span<const PolicySnapshot> zoo,
                          std::span<const AlgorithmKind> kinds, std::span<const double> rates,
                          double alpha, int eval_steps, int episodes, std::mt19937_64& rng);

struct BootstrapSummary {
  double mean = 0.0;  // mean of resample means
  double ci_low = 0.0;
  double ci_high = 0.0;
  int effective_sample_size = 0;       // distinct original sample values
  std::vector<double> resample_means;  // kept for histograms / re-analysis
};

BootstrapSummary bootstrap_estimate(std::span<const double> samples, int b, double level,
                                    std::mt19937_64& rng);

// Equal-width bin counts over [min, max] of values; for report histograms.
std::vector<int> histogram_counts(std::span<const double> values, int bins);

}  // namespace cprnet
