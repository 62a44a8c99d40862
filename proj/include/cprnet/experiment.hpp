#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cprnet/egta.hpp"
#include "cprnet/training.hpp"

namespace cprnet {

struct TrainParams {
  int episodes = 2000;
  int rollout = 20;
  int hidden = 64;
  int msg_dim = 8;
  double gamma = 0.99;
  double actor_lr = 5e-4;
  double critic_lr = 2.5e-4;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
};

struct EvalSettings {
  double rate = 0.055;
  int max_steps = 100;
  int episodes_per_cell = 32;  // meta-game episodes per configuration
  int label_episodes = 1;      // greedy evaluation repeats identically
  double label_lo = 25.0;
  double label_hi = 35.0;
  bool greedy = true;
  bool weighted_payoff = true;
  int bootstrap_b = 1000;
  double bootstrap_level = 0.95;
};

// Full experiment grid: (kind, rate, alpha, seed) cells trained, labelled at
// the evaluation rate, and analysed into Schelling diagrams and reports.
struct ExperimentConfig {
  std::vector<AlgorithmKind> kinds{kAllKinds.begin(), kAllKinds.end()};
  std::vector<double> rates = {0.1, 0.088, 0.077, 0.065, 0.053, 0.042, 0.03};
  std::vector<double> alphas = {0.0, 0.1, 1.0};
  int seeds_per_cell = 5;
  std::uint64_t master_seed = 0;
  std::filesystem::path out_dir = "out";
  int jobs = 1;
  EnvConfig env;  // template; regen_rate and alpha are set per cell
  TrainParams train;
  EvalSettings eval;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Stable hash over the fields that determine a cell's training outcome
// (master seed, cell identity, environment and training hyperparameters).
std::string cell_config_hash(const ExperimentConfig& config, AlgorithmKind kind, double rate,
                             double alpha, int seed_idx);

// Deterministic per-(cell, phase) RNG stream derivation.
std::uint64_t sub_seed(const ExperimentConfig& config, AlgorithmKind kind, double rate,
                       double alpha, int seed_idx, std::string_view phase);

TrainConfig make_train_config(const ExperimentConfig& config, AlgorithmKind kind, double rate,
                              double alpha, int seed_idx);

// Environment the meta-game and labelling evaluations run in.
EnvConfig make_eval_env(const ExperimentConfig& config, double alpha);

std::filesystem::path snapshot_path(const ExperimentConfig& config, AlgorithmKind kind,
                                    double rate, double alpha, int seed_idx);

// Pipeline commands. Each is resumable and idempotent for a fixed config;
// all artifact bytes are determined by (config, master_seed).
void cmd_train(const ExperimentConfig& config);
void cmd_evaluate(const ExperimentConfig& config);
void cmd_schelling(const ExperimentConfig& config);
void cmd_report(const ExperimentConfig& config);
void cmd_all(const ExperimentConfig& config);

}  // namespace cprnet
