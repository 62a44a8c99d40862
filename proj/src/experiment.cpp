#include "cprnet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "cprnet/rng.hpp"
#include "cprnet/serialize.hpp"
#include "cprnet/svg.hpp"

namespace cprnet {

using nlohmann::json;

namespace {

std::vector<AlgorithmKind> kinds_from_json(const json& j) {
  std::vector<AlgorithmKind> kinds;
  for (const json& k : j) kinds.push_back(kind_from_string(k.get<std::string>()));
  return kinds;
}

std::string alpha_tag(double alpha) { return fmt_double(alpha); }
std::string rate_tag(double rate) { return fmt_double(rate); }

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("kinds")) cfg.kinds = kinds_from_json(j["kinds"]);
  if (j.contains("rates")) cfg.rates = j["rates"].get<std::vector<double>>();
  if (j.contains("alphas")) cfg.alphas = j["alphas"].get<std::vector<double>>();
  cfg.seeds_per_cell = j.value("seeds_per_cell", cfg.seeds_per_cell);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  cfg.jobs = j.value("jobs", cfg.jobs);
  if (j.contains("env")) cfg.env = env_config_from_json(j["env"]);
  if (j.contains("train")) {
    const json& t = j["train"];
    cfg.train.episodes = t.value("episodes", cfg.train.episodes);
    cfg.train.rollout = t.value("rollout", cfg.train.rollout);
    cfg.train.hidden = t.value("hidden", cfg.train.hidden);
    cfg.train.msg_dim = t.value("msg_dim", cfg.train.msg_dim);
    cfg.train.gamma = t.value("gamma", cfg.train.gamma);
    cfg.train.actor_lr = t.value("actor_lr", cfg.train.actor_lr);
    cfg.train.critic_lr = t.value("critic_lr", cfg.train.critic_lr);
    cfg.train.value_coef = t.value("value_coef", cfg.train.value_coef);
    cfg.train.entropy_coef = t.value("entropy_coef", cfg.train.entropy_coef);
  }
  if (j.contains("eval")) {
    const json& e = j["eval"];
    cfg.eval.rate = e.value("rate", cfg.eval.rate);
    cfg.eval.max_steps = e.value("max_steps", cfg.eval.max_steps);
    cfg.eval.episodes_per_cell = e.value("episodes_per_cell", cfg.eval.episodes_per_cell);
    cfg.eval.label_episodes = e.value("label_episodes", cfg.eval.label_episodes);
    cfg.eval.label_lo = e.value("label_lo", cfg.eval.label_lo);
    cfg.eval.label_hi = e.value("label_hi", cfg.eval.label_hi);
    cfg.eval.greedy = e.value("greedy", cfg.eval.greedy);
    cfg.eval.weighted_payoff = e.value("weighted_payoff", cfg.eval.weighted_payoff);
    cfg.eval.bootstrap_b = e.value("bootstrap_b", cfg.eval.bootstrap_b);
    cfg.eval.bootstrap_level = e.value("bootstrap_level", cfg.eval.bootstrap_level);
  }
  cfg.validate();
  return cfg;
}

json ExperimentConfig::to_json() const {
  json j;
  json kinds_json = json::array();
  for (AlgorithmKind k : kinds) kinds_json.push_back(to_string(k));
  j["kinds"] = kinds_json;
  j["rates"] = rates;
  j["alphas"] = alphas;
  j["seeds_per_cell"] = seeds_per_cell;
  j["master_seed"] = master_seed;
  j["out_dir"] = out_dir.string();
  j["jobs"] = jobs;
  j["env"] = env_config_to_json(env);
  j["train"] = json{{"episodes", train.episodes},
                    {"rollout", train.rollout},
                    {"hidden", train.hidden},
                    {"msg_dim", train.msg_dim},
                    {"gamma", train.gamma},
                    {"actor_lr", train.actor_lr},
                    {"critic_lr", train.critic_lr},
                    {"value_coef", train.value_coef},
                    {"entropy_coef", train.entropy_coef}};
  j["eval"] = json{{"rate", eval.rate},
                   {"max_steps", eval.max_steps},
                   {"episodes_per_cell", eval.episodes_per_cell},
                   {"label_episodes", eval.label_episodes},
                   {"label_lo", eval.label_lo},
                   {"label_hi", eval.label_hi},
                   {"greedy", eval.greedy},
                   {"weighted_payoff", eval.weighted_payoff},
                   {"bootstrap_b", eval.bootstrap_b},
                   {"bootstrap_level", eval.bootstrap_level}};
  return j;
}

void ExperimentConfig::validate() const {
  if (kinds.empty()) throw std::invalid_argument("experiment config: kinds list is empty");
  if (rates.empty()) throw std::invalid_argument("experiment config: rates list is empty");
  if (alphas.empty()) throw std::invalid_argument("experiment config: alphas list is empty");
  if (seeds_per_cell < 1) {
    throw std::invalid_argument("experiment config: seeds_per_cell must be >= 1");
  }
  if (jobs < 1) throw std::invalid_argument("experiment config: jobs must be >= 1");
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw std::invalid_argument("experiment config: alpha values must lie in [0, 1]");
    }
  }
  for (double r : rates) {
    if (r < 0.0) throw std::invalid_argument("experiment config: rates must be >= 0");
  }
  EnvConfig probe = env;
  probe.regen_rate = rates.front();
  probe.alpha = alphas.front();
  probe.validate();
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return ExperimentConfig::from_json(json::parse(read_file(path)));
}

namespace {

// Canonical text form of everything that determines a trained cell.
std::string cell_config_string(const ExperimentConfig& cfg, AlgorithmKind kind, double rate,
                               double alpha, int seed_idx) {
  std::ostringstream s;
  s << "master=" << cfg.master_seed << "|kind=" << to_string(kind) << "|rate=" << fmt_double(rate)
    << "|alpha=" << fmt_double(alpha) << "|seed=" << seed_idx;
  s << "|env:n=" << cfg.env.n_agents << ",w0=" << fmt_double(cfg.env.w0)
    << ",flow=" << fmt_double(cfg.env.total_flow) << ",wmax=" << fmt_double(cfg.env.w_max)
    << ",steps=" << cfg.env.max_steps << ",topo=" << cfg.env.topology.preset_name();
  if (cfg.env.topology.preset_name() == "custom") {
    for (auto [a, b] : cfg.env.topology.edges()) s << ';' << a << '-' << b;
  }
  s << "|train:ep=" << cfg.train.episodes << ",n=" << cfg.train.rollout
    << ",h=" << cfg.train.hidden << ",m=" << cfg.train.msg_dim
    << ",g=" << fmt_double(cfg.train.gamma) << ",alr=" << fmt_double(cfg.train.actor_lr)
    << ",clr=" << fmt_double(cfg.train.critic_lr) << ",vc=" << fmt_double(cfg.train.value_coef)
    << ",ec=" << fmt_double(cfg.train.entropy_coef);
  return s.str();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string cell_config_hash(const ExperimentConfig& config, AlgorithmKind kind, double rate,
                             double alpha, int seed_idx) {
  return hex64(fnv1a64(cell_config_string(config, kind, rate, alpha, seed_idx)));
}

std::uint64_t sub_seed(const ExperimentConfig& config, AlgorithmKind kind, double rate,
                       double alpha, int seed_idx, std::string_view phase) {
  std::ostringstream s;
  s << "master=" << config.master_seed << "|kind=" << to_string(kind)
    << "|rate=" << fmt_double(rate) << "|alpha=" << fmt_double(alpha) << "|seed=" << seed_idx
    << "|phase=" << phase;
  return mix64(fnv1a64(s.str()));
}

TrainConfig make_train_config(const ExperimentConfig& config, AlgorithmKind kind, double rate,
                              double alpha, int seed_idx) {
  TrainConfig tc;
  tc.kind = kind;
  tc.env = config.env;
  tc.env.regen_rate = rate;
  tc.env.alpha = alpha;
  tc.seed = sub_seed(config, kind, rate, alpha, seed_idx, "train");
  tc.episodes = config.train.episodes;
  tc.rollout = config.train.rollout;
  tc.hidden = config.train.hidden;
  tc.msg_dim = config.train.msg_dim;
  tc.gamma = config.train.gamma;
  tc.actor_lr = config.train.actor_lr;
  tc.critic_lr = config.train.critic_lr;
  tc.value_coef = config.train.value_coef;
  tc.entropy_coef = config.train.entropy_coef;
  return tc;
}

EnvConfig make_eval_env(const ExperimentConfig& config, double alpha) {
  EnvConfig env = config.env;
  env.regen_rate = config.eval.rate;
  env.max_steps = config.eval.max_steps;
  env.alpha = alpha;
  return env;
}

std::filesystem::path snapshot_path(const ExperimentConfig& config, AlgorithmKind kind,
                                    double rate, double alpha, int seed_idx) {
  std::ostringstream name;
  name << to_string(kind) << "_c" << rate_tag(rate) << "_a" << alpha_tag(alpha) << "_s" << seed_idx
       << ".json";
  return config.out_dir / "zoo" / name.str();
}

namespace {

struct Cell {
  AlgorithmKind kind;
  double rate;
  double alpha;
  int seed_idx;
};

std::vector<Cell> grid_cells(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (AlgorithmKind kind : cfg.kinds) {
    for (double rate : cfg.rates) {
      for (double alpha : cfg.alphas) {
        for (int s = 0; s < cfg.seeds_per_cell; ++s) {
          cells.push_back({kind, rate, alpha, s});
        }
      }
    }
  }
  return cells;
}

void train_cell(const ExperimentConfig& cfg, const Cell& cell, std::mutex& log_mutex) {
  const std::filesystem::path path =
      snapshot_path(cfg, cell.kind, cell.rate, cell.alpha, cell.seed_idx);
  const std::string hash =
      cell_config_hash(cfg, cell.kind, cell.rate, cell.alpha, cell.seed_idx);

  if (std::filesystem::exists(path)) {
    const PolicySnapshot existing = load_snapshot(path);
    if (existing.config_hash == hash) {
      if (existing.kind != cell.kind || existing.rate != cell.rate ||
          existing.alpha != cell.alpha || existing.seed != static_cast<std::uint64_t>(cell.seed_idx)) {
        throw std::runtime_error("config hash collision with differing contents: " + path.string());
      }
      std::lock_guard<std::mutex> lock(log_mutex);
      std::cout << "train: skip " << path.filename().string() << " (up to date)\n";
      return;
    }
  }

  const TrainConfig tc = make_train_config(cfg, cell.kind, cell.rate, cell.alpha, cell.seed_idx);
  TrainResult trained = train(tc);

  PolicySnapshot snap;
  snap.kind = cell.kind;
  snap.rate = cell.rate;
  snap.alpha = cell.alpha;
  snap.seed = static_cast<std::uint64_t>(cell.seed_idx);
  snap.episodes = tc.episodes;
  snap.hidden = tc.hidden;
  snap.msg_dim = tc.msg_dim;
  snap.config_hash = hash;
  snap.train_env = tc.env;
  snap.agents = std::move(trained.agents);
  save_snapshot(snap, path);

  std::ostringstream curves;
  curves << "episode,mean_weighted_return,mean_restraint\n";
  for (size_t e = 0; e < trained.episode_return.size(); ++e) {
    curves << e << ',' << fmt_double(trained.episode_return[e]) << ','
           << fmt_double(trained.episode_restraint[e]) << '\n';
  }
  std::filesystem::path curves_path = path;
  curves_path.replace_extension();
  curves_path += "_curves.csv";
  atomic_write_file(curves_path, curves.str());

  std::lock_guard<std::mutex> lock(log_mutex);
  std::cout << "train: wrote " << path.filename().string() << "\n";
}

std::vector<PolicySnapshot> load_zoo(const ExperimentConfig& cfg,
                                     std::vector<std::string>* missing) {
  std::vector<PolicySnapshot> zoo;
  for (const Cell& cell : grid_cells(cfg)) {
    const std::filesystem::path path =
        snapshot_path(cfg, cell.kind, cell.rate, cell.alpha, cell.seed_idx);
    if (!std::filesystem::exists(path)) {
      if (missing == nullptr) {
        throw std::runtime_error("missing snapshot " + path.string() + "; run train first");
      }
      missing->push_back(path.filename().string());
      continue;
    }
    zoo.push_back(load_snapshot(path));
  }
  return zoo;
}

std::string heatmap_csv(const std::vector<Heatmap>& heatmaps) {
  std::ostringstream out;
  out << "algorithm,rate,alpha,mean_restraint,n_seeds\n";
  for (const Heatmap& hm : heatmaps) {
    for (size_t ki = 0; ki < hm.kinds.size(); ++ki) {
      for (size_t ri = 0; ri < hm.rates.size(); ++ri) {
        const HeatmapCell& cell = hm.cells[ki][ri];
        out << to_string(hm.kinds[ki]) << ',' << fmt_double(hm.rates[ri]) << ','
            << fmt_double(hm.alpha) << ',';
        if (cell.missing) {
          out << "";
        } else {
          out << fmt_double(cell.mean_restraint);
        }
        out << ',' << cell.n_seeds << '\n';
      }
    }
  }
  return out.str();
}

json table_to_json(const MetaGameTable& table) {
  json cells = json::array();
  const int n = table.n_agents;
  for (int x = 0; x <= n; ++x) {
    json cell;
    cell["x"] = x;
    const MetaCell& c = table.coop[static_cast<size_t>(x)];
    const MetaCell& d = table.defect[static_cast<size_t>(x)];
    if (c.feasible) {
      cell["cooperate"] = json{{"n", c.samples.size()},
                               {"samples", c.samples}};
      if (c.has_data()) cell["cooperate"]["mean"] = c.mean();
    }
    if (d.feasible) {
      cell["defect"] = json{{"n", d.samples.size()}, {"samples", d.samples}};
      if (d.has_data()) cell["defect"]["mean"] = d.mean();
    }
    if (table.complete()) cell["r_avg"] = table.r_avg(x);
    cells.push_back(cell);
  }
  json j;
  j["n_agents"] = n;
  j["parameterisation"] = "total";
  j["cells"] = cells;
  j["gaps"] = table.gaps();
  return j;
}

MetaGameTable table_from_json(const json& j) {
  const int n = j.at("n_agents").get<int>();
  std::vector<ConfigurationSamples> per_x(static_cast<size_t>(n) + 1);
  for (const json& cell : j.at("cells")) {
    const int x = cell.at("x").get<int>();
    if (cell.contains("cooperate")) {
      per_x[static_cast<size_t>(x)].cooperate =
          cell["cooperate"].at("samples").get<std::vector<double>>();
    }
    if (cell.contains("defect")) {
      per_x[static_cast<size_t>(x)].defect =
          cell["defect"].at("samples").get<std::vector<double>>();
    }
  }
  return build_meta_table(n, per_x);
}

std::string table_csv(const MetaGameTable& table) {
  std::ostringstream out;
  out << "x,r_c,n_c,r_d,n_d,r_avg\n";
  for (int x = 0; x <= table.n_agents; ++x) {
    const MetaCell& c = table.coop[static_cast<size_t>(x)];
    const MetaCell& d = table.defect[static_cast<size_t>(x)];
    out << x << ',';
    if (c.feasible && c.has_data()) out << fmt_double(c.mean());
    out << ',' << (c.feasible ? c.samples.size() : 0) << ',';
    if (d.feasible && d.has_data()) out << fmt_double(d.mean());
    out << ',' << (d.feasible ? d.samples.size() : 0) << ',';
    if (table.complete()) out << fmt_double(table.r_avg(x));
    out << '\n';
  }
  return out.str();
}

std::filesystem::path schelling_dir(const ExperimentConfig& cfg) {
  return cfg.out_dir / "schelling";
}

std::string kind_alpha_stem(AlgorithmKind kind, double alpha) {
  return std::string(to_string(kind)) + "_a" + alpha_tag(alpha);
}

}  // namespace

void cmd_train(const ExperimentConfig& config) {
  config.validate();
  std::filesystem::create_directories(config.out_dir / "zoo");
  const std::vector<Cell> cells = grid_cells(config);
  std::mutex log_mutex;

  if (config.jobs <= 1) {
    for (const Cell& cell : cells) train_cell(config, cell, log_mutex);
    return;
  }

  std::atomic<size_t> next{0};
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(config.jobs));
  for (int w = 0; w < config.jobs; ++w) {
    workers.emplace_back([&, w]() {
      try {
        for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
          train_cell(config, cells[i], log_mutex);
        }
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  }
  for (std::thread& t : workers) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void cmd_evaluate(const ExperimentConfig& config) {
  config.validate();
  std::vector<std::string> missing;
  std::vector<PolicySnapshot> zoo = load_zoo(config, &missing);

  // Labelling pass at the evaluation rate.
  for (PolicySnapshot& snap : zoo) {
    const EnvConfig eval_env = make_eval_env(config, snap.alpha);
    std::mt19937_64 rng(
        sub_seed(config, snap.kind, snap.rate, snap.alpha,
                 static_cast<int>(snap.seed), "label"));
    EvalOptions options;
    options.greedy = config.eval.greedy;
    snap.restraint = measure_restraint(snap, eval_env, config.eval.label_episodes, rng, options);
    snap.labels.clear();
    for (double r : snap.restraint) {
      snap.labels.push_back(label_policy(r, config.eval.label_lo, config.eval.label_hi));
    }
    save_snapshot(snap, snapshot_path(config, snap.kind, snap.rate, snap.alpha,
                                      static_cast<int>(snap.seed)));
  }

  // Restraint heatmaps at the training rates.
  std::vector<Heatmap> heatmaps;
  for (double alpha : config.alphas) {
    std::mt19937_64 rng(mix64(config.master_seed) ^ fnv1a64("heatmap" + alpha_tag(alpha)));
    Heatmap hm = restraint_heatmap(zoo, config.kinds, config.rates, alpha,
                                   config.eval.max_steps, config.eval.label_episodes, rng);
    atomic_write_file(config.out_dir / "evaluate" / ("heatmap_a" + alpha_tag(alpha) + ".svg"),
                      heatmap_svg(hm, "restraint heatmap, alpha=" + alpha_tag(alpha)));
    heatmaps.push_back(std::move(hm));
  }
  atomic_write_file(config.out_dir / "evaluate" / "heatmap.csv", heatmap_csv(heatmaps));

  // Coverage: pool sizes per (kind, alpha) and any missing snapshots.
  json coverage;
  coverage["missing_snapshots"] = missing;
  json pools_json = json::array();
  for (AlgorithmKind kind : config.kinds) {
    for (double alpha : config.alphas) {
      std::vector<const PolicySnapshot*> group;
      for (const PolicySnapshot& s : zoo) {
        if (s.kind == kind && s.alpha == alpha) group.push_back(&s);
      }
      const RolePools pools = build_pools(group);
      pools_json.push_back(json{{"kind", to_string(kind)},
                                {"alpha", alpha},
                                {"cooperate", pools.cooperate.size()},
                                {"defect", pools.defect.size()},
                                {"unlabeled", pools.unlabeled}});
    }
  }
  coverage["pools"] = pools_json;
  atomic_write_file(config.out_dir / "evaluate" / "coverage.json", coverage.dump(2) + "\n");
  std::cout << "evaluate: labelled " << zoo.size() << " snapshots, " << missing.size()
            << " missing\n";
}

void cmd_schelling(const ExperimentConfig& config) {
  config.validate();
  std::vector<PolicySnapshot> zoo = load_zoo(config, nullptr);
  std::filesystem::create_directories(schelling_dir(config));

  for (AlgorithmKind kind : config.kinds) {
    for (double alpha : config.alphas) {
      std::vector<const PolicySnapshot*> group;
      for (const PolicySnapshot& s : zoo) {
        if (s.kind == kind && s.alpha == alpha) {
          if (!s.evaluated()) {
            throw std::runtime_error("snapshot not labelled; run evaluate before schelling");
          }
          group.push_back(&s);
        }
      }
      if (group.empty()) continue;
      const RolePools pools = build_pools(group);
      const EnvConfig eval_env = make_eval_env(config, alpha);
      const int n = eval_env.n_agents;

      std::vector<ConfigurationSamples> per_x(static_cast<size_t>(n) + 1);
      json gaps = json::array();
      for (int x = 0; x <= n; ++x) {
        std::mt19937_64 rng(
            sub_seed(config, kind, config.eval.rate, alpha, x, "meta_game"));
        EvalOptions options;
        options.greedy = config.eval.greedy;
        try {
          per_x[static_cast<size_t>(x)] =
              evaluate_configuration(pools, x, eval_env, config.eval.episodes_per_cell, rng,
                                     options, config.eval.weighted_payoff);
        } catch (const pool_gap_error& e) {
          gaps.push_back(json{{"x", x}, {"reason", e.what()}});
        }
      }

      const MetaGameTable table = build_meta_table(n, per_x);
      const std::string stem = kind_alpha_stem(kind, alpha);
      json table_json = table_to_json(table);
      table_json["coverage_gaps"] = gaps;
      table_json["unlabeled_members"] = pools.unlabeled;
      atomic_write_file(schelling_dir(config) / (stem + "_table.json"),
                        table_json.dump(2) + "\n");
      atomic_write_file(schelling_dir(config) / (stem + "_table.csv"), table_csv(table));

      const MetaGameTable other = reparameterise(table);
      if (table.complete()) {
        const SSDReport ssd = ssd_indicator(table);
        const EquilibriumSet eq = find_equilibria(table);
        json ssd_json{{"c1", ssd.c1},          {"c2", ssd.c2},   {"c3", ssd.c3},
                      {"c3_range", json::array({ssd.c3_lo, ssd.c3_hi})},
                      {"is_ssd", ssd.is_ssd}};
        atomic_write_file(schelling_dir(config) / (stem + "_ssd.json"), ssd_json.dump(2) + "\n");
        json eq_json;
        eq_json["equilibria"] = eq.equilibria;
        json margins = json::array();
        for (const auto& m : eq.margins) {
          json entry{{"x", m.x}};
          if (std::isfinite(m.coop_stay)) entry["coop_stay"] = m.coop_stay;
          if (std::isfinite(m.defect_stay)) entry["defect_stay"] = m.defect_stay;
          margins.push_back(entry);
        }
        eq_json["margins"] = margins;
        atomic_write_file(schelling_dir(config) / (stem + "_equilibria.json"),
                          eq_json.dump(2) + "\n");
        atomic_write_file(
            schelling_dir(config) / (stem + "_total.svg"),
            schelling_svg(table, &ssd, &eq,
                          std::string(to_string(kind)) + " alpha=" + alpha_tag(alpha)));
        atomic_write_file(
            schelling_dir(config) / (stem + "_other.svg"),
            schelling_svg(other, &ssd, nullptr,
                          std::string(to_string(kind)) + " alpha=" + alpha_tag(alpha) +
                              " (other cooperators)"));
      } else {
        atomic_write_file(
            schelling_dir(config) / (stem + "_total.svg"),
            schelling_svg(table, nullptr, nullptr,
                          std::string(to_string(kind)) + " alpha=" + alpha_tag(alpha) +
                              " (incomplete)"));
        atomic_write_file(
            schelling_dir(config) / (stem + "_other.svg"),
            schelling_svg(other, nullptr, nullptr,
                          std::string(to_string(kind)) + " alpha=" + alpha_tag(alpha) +
                              " (incomplete, other cooperators)"));
      }
      std::cout << "schelling: wrote " << stem << " (complete=" << table.complete() << ")\n";
    }
  }
}

void cmd_report(const ExperimentConfig& config) {
  config.validate();
  std::vector<PolicySnapshot> zoo = load_zoo(config, nullptr);

  json bundle;
  bundle["master_seed"] = config.master_seed;
  json blocks = json::array();

  for (AlgorithmKind kind : config.kinds) {
    for (double alpha : config.alphas) {
      const std::string stem = kind_alpha_stem(kind, alpha);
      const std::filesystem::path table_path = schelling_dir(config) / (stem + "_table.json");
      if (!std::filesystem::exists(table_path)) continue;
      const json table_json = json::parse(read_file(table_path));
      const MetaGameTable table = table_from_json(table_json);
      const int n = table.n_agents;

      json block;
      block["kind"] = to_string(kind);
      block["alpha"] = alpha;
      block["config_hash_example"] = cell_config_hash(config, kind, config.rates.front(), alpha, 0);

      // Bootstrap summary per feasible cell with data.
      json boot = json::array();
      for (int x = 0; x <= n; ++x) {
        for (const char* role : {"cooperate", "defect"}) {
          const MetaCell& cell = role == std::string("cooperate")
                                     ? table.coop[static_cast<size_t>(x)]
                                     : table.defect[static_cast<size_t>(x)];
          if (!cell.feasible || !cell.has_data()) continue;
          std::mt19937_64 rng(sub_seed(config, kind, config.eval.rate, alpha, x,
                                       std::string("bootstrap_") + role));
          const BootstrapSummary bs = bootstrap_estimate(
              cell.samples, config.eval.bootstrap_b, config.eval.bootstrap_level, rng);
          boot.push_back(json{{"x", x},
                              {"role", role},
                              {"mean", bs.mean},
                              {"ci_low", bs.ci_low},
                              {"ci_high", bs.ci_high},
                              {"effective_sample_size", bs.effective_sample_size},
                              {"histogram", histogram_counts(bs.resample_means, 20)}});
        }
      }
      block["bootstrap"] = boot;

      if (table.complete()) {
        const SSDReport ssd = ssd_indicator(table);
        const EquilibriumSet eq = find_equilibria(table);
        block["ssd"] = json{{"c1", ssd.c1}, {"c2", ssd.c2}, {"c3", ssd.c3}, {"is_ssd", ssd.is_ssd}};
        block["equilibria"] = eq.equilibria;

        // Social metrics at all-cooperate and at the R_avg-maximal equilibrium.
        std::vector<const PolicySnapshot*> group;
        for (const PolicySnapshot& s : zoo) {
          if (s.kind == kind && s.alpha == alpha) group.push_back(&s);
        }
        const RolePools pools = build_pools(group);
        const EnvConfig eval_env = make_eval_env(config, alpha);

        auto metrics_for = [&](int x, std::string_view phase) -> std::optional<json> {
          std::mt19937_64 rng(sub_seed(config, kind, config.eval.rate, alpha, x, phase));
          EvalOptions options;
          options.greedy = config.eval.greedy;
          std::vector<EvalEpisode> episodes;
          try {
            for (int e = 0; e < config.eval.episodes_per_cell; ++e) {
              std::vector<const PoolMember*> chosen;
              for (int c = 0; c < x; ++c) {
                chosen.push_back(&pools.cooperate[static_cast<size_t>(uniform_int(
                    rng, static_cast<int>(pools.cooperate.size())))]);
              }
              for (int d = 0; d < n - x; ++d) {
                chosen.push_back(&pools.defect[static_cast<size_t>(
                    uniform_int(rng, static_cast<int>(pools.defect.size())))]);
              }
              if (chosen.size() != static_cast<size_t>(n)) return std::nullopt;
              std::vector<int> positions(static_cast<size_t>(n));
              std::iota(positions.begin(), positions.end(), 0);
              shuffle_in_place(positions, rng);
              std::vector<TeamMember> team(static_cast<size_t>(n));
              for (int k = 0; k < n; ++k) {
                team[static_cast<size_t>(positions[static_cast<size_t>(k)])] =
                    chosen[static_cast<size_t>(k)]->as_team_member();
              }
              episodes.push_back(run_team_episode(team, eval_env, options, rng));
            }
          } catch (const std::exception&) {
            return std::nullopt;
          }
          const SocialMetrics m = social_metrics(episodes, eval_env.max_steps);
          return json{{"utilitarian", m.utilitarian},
                      {"equality", m.equality},
                      {"sustainability", m.sustainability}};
        };

        if (!pools.cooperate.empty()) {
          if (auto m = metrics_for(n, "social_all_coop")) block["metrics_all_cooperate"] = *m;
        }
        if (!eq.equilibria.empty()) {
          // R_avg-maximal equilibrium; ties resolved toward lower x.
          int best_x = eq.equilibria.front();
          bool tie = false;
          for (int x : eq.equilibria) {
            if (table.r_avg(x) > table.r_avg(best_x)) {
              best_x = x;
              tie = false;
            } else if (x != best_x && table.r_avg(x) == table.r_avg(best_x)) {
              tie = true;
            }
          }
          block["equilibrium_selected"] = best_x;
          block["equilibrium_tie"] = tie;
          if ((best_x == 0 || !pools.cooperate.empty()) &&
              (best_x == n || !pools.defect.empty())) {
            if (auto m = metrics_for(best_x, "social_equilibrium")) {
              block["metrics_at_equilibrium"] = *m;
            }
          }
        }
      } else {
        block["gaps"] = table.gaps();
      }
      blocks.push_back(block);
    }
  }

  bundle["blocks"] = blocks;
  atomic_write_file(config.out_dir / "report" / "report.json", bundle.dump(2) + "\n");
  std::cout << "report: wrote " << (config.out_dir / "report" / "report.json").string() << "\n";
}

void cmd_all(const ExperimentConfig& config) {
  cmd_train(config);
  cmd_evaluate(config);
  cmd_schelling(config);
  cmd_report(config);
}

}  // namespace cprnet
