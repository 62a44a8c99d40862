#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cprnet/experiment.hpp"
#include "cprnet/serialize.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct CliOverrides {
  std::string config_path;
  std::string out_dir;
  std::string kinds;
  std::string rates;
  std::string alphas;
  long long seed = -1;
  int jobs = 0;
};

cprnet::ExperimentConfig resolve_config(const CliOverrides& o) {
  cprnet::ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    cfg = cprnet::load_experiment_config(o.config_path);
  }
  if (const char* env_out = std::getenv("CPRNET_OUT"); env_out != nullptr && *env_out != '\0') {
    cfg.out_dir = env_out;
  }
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (o.seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(o.seed);
  if (o.jobs > 0) cfg.jobs = o.jobs;
  if (!o.kinds.empty()) {
    cfg.kinds.clear();
    for (const std::string& k : split_csv(o.kinds)) {
      cfg.kinds.push_back(cprnet::kind_from_string(k));
    }
  }
  if (!o.rates.empty()) {
    cfg.rates.clear();
    for (const std::string& r : split_csv(o.rates)) cfg.rates.push_back(std::stod(r));
  }
  if (!o.alphas.empty()) {
    cfg.alphas.clear();
    for (const std::string& a : split_csv(o.alphas)) cfg.alphas.push_back(std::stod(a));
  }
  cfg.validate();
  return cfg;
}

void add_common_flags(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "experiment config JSON path");
  cmd->add_option("--out", o.out_dir, "output directory (overrides config and CPRNET_OUT)");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--jobs", o.jobs, "worker pool size for training cells");
  cmd->add_option("--kinds", o.kinds, "comma-separated algorithm list");
  cmd->add_option("--rates", o.rates, "comma-separated regeneration rates");
  cmd->add_option("--alphas", o.alphas, "comma-separated neighbour-reward weights");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"networked multi-agent CPR testbed and empirical game-theoretic analysis"};
  app.require_subcommand(1);

  CliOverrides o;
  CLI::App* train = app.add_subcommand("train", "train the policy zoo over the experiment grid");
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "label snapshots by restraint and emit heatmaps");
  CLI::App* schelling =
      app.add_subcommand("schelling", "estimate meta-game tables and Schelling diagrams");
  CLI::App* report = app.add_subcommand("report", "assemble social metrics and bootstrap bundle");
  CLI::App* all = app.add_subcommand("all", "run train, evaluate, schelling, report");
  for (CLI::App* cmd : {train, evaluate, schelling, report, all}) {
    add_common_flags(cmd, o);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const cprnet::ExperimentConfig cfg = resolve_config(o);
    if (train->parsed()) {
      cprnet::cmd_train(cfg);
    } else if (evaluate->parsed()) {
      cprnet::cmd_evaluate(cfg);
    } else if (schelling->parsed()) {
      cprnet::cmd_schelling(cfg);
    } else if (report->parsed()) {
      cprnet::cmd_report(cfg);
    } else if (all->parsed()) {
      cprnet::cmd_all(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
