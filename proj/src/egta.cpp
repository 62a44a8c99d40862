#include "cprnet/egta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cprnet/rng.hpp"

namespace cprnet {

const char* to_string(PolicyLabel label) {
  switch (label) {
    case PolicyLabel::Cooperate: return "Cooperate";
    case PolicyLabel::Defect: return "Defect";
    case PolicyLabel::Unlabeled: return "Unlabeled";
  }
  return "?";
}

PolicyLabel label_from_string(std::string_view name) {
  if (name == "Cooperate") return PolicyLabel::Cooperate;
  if (name == "Defect") return PolicyLabel::Defect;
  if (name == "Unlabeled") return PolicyLabel::Unlabeled;
  throw std::invalid_argument("unknown policy label: " + std::string(name));
}

PolicyLabel label_policy(double restraint, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("label thresholds: lo must be < hi");
  if (!(restraint >= 0.0 && restraint <= 100.0)) {
    throw std::invalid_argument("label: restraint must lie in [0, 100]");
  }
  if (restraint < lo) return PolicyLabel::Defect;
  if (restraint > hi) return PolicyLabel::Cooperate;
  return PolicyLabel::Unlabeled;
}

Action ScriptedPolicy::decide(const Observation& obs, int t) const {
  switch (rule) {
    case Rule::AlwaysOpen: return Action::Open;
    case Rule::AlwaysClosed: return Action::Closed;
    case Rule::OpenEveryOther: return t % 2 == 0 ? Action::Open : Action::Closed;
    case Rule::CloseAbovePiped:
      return obs.own_piped > piped_threshold ? Action::Closed : Action::Open;
  }
  return Action::Open;
}

TeamMember PoolMember::as_team_member() const {
  TeamMember m;
  if (script.has_value()) {
    m.script = script;
  } else {
    m.module = &snapshot->agents.at(static_cast<size_t>(agent));
  }
  return m;
}

EvalEpisode run_team_episode(std::span<const TeamMember> team, const EnvConfig& env_config,
                             const EvalOptions& options, std::mt19937_64& rng) {
  const int n = env_config.n_agents;
  if (static_cast<int>(team.size()) != n) {
    throw std::invalid_argument("eval episode: team size does not match environment");
  }

  bool any_module = false;
  bool all_module = true;
  for (const TeamMember& m : team) {
    if (m.module != nullptr && m.script.has_value()) {
      throw std::invalid_argument("eval episode: member is both scripted and module-backed");
    }
    if (m.module != nullptr) {
      any_module = true;
    } else if (m.script.has_value()) {
      all_module = false;
    } else {
      throw std::invalid_argument("eval episode: empty team member");
    }
  }
  AlgorithmKind kind = AlgorithmKind::IA2C;
  if (any_module) {
    for (const TeamMember& m : team) {
      if (m.module != nullptr) {
        kind = m.module->kind();
        break;
      }
    }
    for (const TeamMember& m : team) {
      if (m.module != nullptr && m.module->kind() != kind) {
        throw std::invalid_argument("eval episode: mixed algorithm kinds in one team");
      }
    }
    if (is_communicative(kind) && !all_module) {
      throw std::invalid_argument(
          "eval episode: communicative kinds need a fully module-backed team");
    }
  }

  WaterEnv env(env_config, 0);
  std::vector<Observation> obs = env.reset();
  std::vector<Fingerprint> fps(static_cast<size_t>(n), kUniformFingerprint);

  EvalEpisode ep;
  ep.weighted_return.assign(static_cast<size_t>(n), 0.0);
  ep.raw_return.assign(static_cast<size_t>(n), 0.0);
  std::vector<std::vector<Action>> actions_taken(static_cast<size_t>(n));

  std::vector<const AgentModule*> modules(static_cast<size_t>(n), nullptr);
  for (int i = 0; i < n; ++i) modules[static_cast<size_t>(i)] = team[static_cast<size_t>(i)].module;

  int t = 0;
  while (!env.state().done) {
    std::vector<std::vector<double>> logits;
    if (any_module && all_module) {
      std::vector<std::vector<double>> inputs(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) {
        inputs[static_cast<size_t>(i)] = actor_input_for(env_config.topology, kind, i, obs, fps);
      }
      logits = team_actor_logits({modules.data(), modules.size()}, env_config.topology, inputs,
                                 obs, fps);
    }

    std::vector<Action> joint(static_cast<size_t>(n));
    std::vector<Fingerprint> new_fps = fps;
    for (int i = 0; i < n; ++i) {
      const TeamMember& m = team[static_cast<size_t>(i)];
      if (m.module != nullptr) {
        std::vector<double> own_logits;
        if (all_module) {
          own_logits = logits[static_cast<size_t>(i)];
        } else {
          const std::vector<double> input =
              actor_input_for(env_config.topology, kind, i, obs, fps);
          std::vector<double> h = m.module->actor_l1.apply_plain(input);
          for (double& v : h) v = std::max(0.0, v);
          own_logits = m.module->actor_head.apply_plain(h);
        }
        const Categorical dist = Categorical::from_logits(own_logits);
        const int a = options.greedy ? dist.argmax() : dist.sample(rng);
        joint[static_cast<size_t>(i)] = static_cast<Action>(a);
        new_fps[static_cast<size_t>(i)] = {dist.probs[0], dist.probs[1]};
      } else {
        const Action a = m.script->decide(obs[static_cast<size_t>(i)], t);
        joint[static_cast<size_t>(i)] = a;
        new_fps[static_cast<size_t>(i)] = {a == Action::Open ? 1.0 : 0.0,
                                           a == Action::Closed ? 1.0 : 0.0};
      }
      actions_taken[static_cast<size_t>(i)].push_back(joint[static_cast<size_t>(i)]);
    }

    const StepResult sr = env.step(joint);
    ep.step_raw.push_back(sr.raw_rewards);
    for (int i = 0; i < n; ++i) {
      ep.weighted_return[static_cast<size_t>(i)] += sr.weighted_rewards[static_cast<size_t>(i)];
      ep.raw_return[static_cast<size_t>(i)] += sr.raw_rewards[static_cast<size_t>(i)];
    }
    if (options.record_trace) {
      TraceRow row;
      row.t = env.state().t;
      row.water = env.state().water;
      row.actions = joint;
      row.raw_rewards = sr.raw_rewards;
      row.weighted_rewards = sr.weighted_rewards;
      row.depleted = sr.depleted;
      ep.trace.push_back(std::move(row));
    }
    obs = sr.observations;
    fps = new_fps;
    ++t;
  }

  ep.length = env.state().t;
  ep.depleted = env.state().depleted;
  ep.restraint.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    ep.restraint[static_cast<size_t>(i)] = restraint_percent(actions_taken[static_cast<size_t>(i)]);
  }
  return ep;
}

std::vector<double> measure_restraint(const PolicySnapshot& snapshot, const EnvConfig& eval_env,
                                      int episodes, std::mt19937_64& rng,
                                      const EvalOptions& options) {
  if (episodes < 1) throw std::invalid_argument("measure_restraint: episodes must be >= 1");
  const int n = eval_env.n_agents;
  std::vector<TeamMember> team(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    team[static_cast<size_t>(i)].module = &snapshot.agents.at(static_cast<size_t>(i));
  }
  std::vector<double> mean(static_cast<size_t>(n), 0.0);
  for (int e = 0; e < episodes; ++e) {
    const EvalEpisode ep = run_team_episode(team, eval_env, options, rng);
    for (int i = 0; i < n; ++i) mean[static_cast<size_t>(i)] += ep.restraint[static_cast<size_t>(i)];
  }
  for (double& v : mean) v /= episodes;
  return mean;
}

RolePools build_pools(std::span<const PolicySnapshot* const> snapshots) {
  RolePools pools;
  for (const PolicySnapshot* snap : snapshots) {
    if (!snap->evaluated()) {
      throw std::invalid_argument("build_pools: snapshot has no restraint measurement");
    }
    for (size_t i = 0; i < snap->agents.size(); ++i) {
      PoolMember m;
      m.snapshot = snap;
      m.agent = static_cast<int>(i);
      switch (snap->labels.at(i)) {
        case PolicyLabel::Cooperate: pools.cooperate.push_back(m); break;
        case PolicyLabel::Defect: pools.defect.push_back(m); break;
        case PolicyLabel::Unlabeled: pools.unlabeled += 1; break;
      }
    }
  }
  return pools;
}

ConfigurationSamples evaluate_configuration(const RolePools& pools, int x,
                                            const EnvConfig& eval_env, int episodes,
                                            std::mt19937_64& rng, const EvalOptions& options,
                                            bool weighted_payoff) {
  const int n = eval_env.n_agents;
  if (x < 0 || x > n) throw std::invalid_argument("evaluate_configuration: x out of range");
  if (episodes < 1) throw std::invalid_argument("evaluate_configuration: episodes must be >= 1");
  if (x > 0 && pools.cooperate.empty()) {
    throw pool_gap_error("no cooperating policies available for x=" + std::to_string(x));
  }
  if (x < n && pools.defect.empty()) {
    throw pool_gap_error("no defecting policies available for x=" + std::to_string(x));
  }

  ConfigurationSamples samples;
  std::vector<int> positions(static_cast<size_t>(n));
  for (int e = 0; e < episodes; ++e) {
    // Draw with replacement, then spread over valve positions uniformly.
    std::vector<const PoolMember*> chosen;
    chosen.reserve(static_cast<size_t>(n));
    for (int c = 0; c < x; ++c) {
      chosen.push_back(&pools.cooperate[static_cast<size_t>(
          uniform_int(rng, static_cast<int>(pools.cooperate.size())))]);
    }
    for (int d = 0; d < n - x; ++d) {
      chosen.push_back(&pools.defect[static_cast<size_t>(
          uniform_int(rng, static_cast<int>(pools.defect.size())))]);
    }
    std::iota(positions.begin(), positions.end(), 0);
    shuffle_in_place(positions, rng);

    std::vector<TeamMember> team(static_cast<size_t>(n));
    std::vector<bool> is_coop(static_cast<size_t>(n), false);
    for (int k = 0; k < n; ++k) {
      const int pos = positions[static_cast<size_t>(k)];
      team[static_cast<size_t>(pos)] = chosen[static_cast<size_t>(k)]->as_team_member();
      is_coop[static_cast<size_t>(pos)] = k < x;
    }

    const EvalEpisode ep = run_team_episode(team, eval_env, options, rng);
    for (int i = 0; i < n; ++i) {
      const double payoff = weighted_payoff ? ep.weighted_return[static_cast<size_t>(i)]
                                            : ep.raw_return[static_cast<size_t>(i)];
      if (is_coop[static_cast<size_t>(i)]) {
        samples.cooperate.push_back(payoff);
      } else {
        samples.defect.push_back(payoff);
      }
    }
  }
  return samples;
}

double MetaCell::mean() const {
  if (samples.empty()) throw std::logic_error("meta cell: mean of empty cell");
  double s = 0.0;
  for (double v : samples) s += v;
  return s / static_cast<double>(samples.size());
}

double MetaGameTable::r_c(int x) const {
  const MetaCell& cell = coop.at(static_cast<size_t>(x));
  if (!cell.feasible) throw std::logic_error("meta table: R_c undefined at x=" + std::to_string(x));
  return cell.mean();
}

double MetaGameTable::r_d(int x) const {
  const MetaCell& cell = defect.at(static_cast<size_t>(x));
  if (!cell.feasible) throw std::logic_error("meta table: R_d undefined at x=" + std::to_string(x));
  return cell.mean();
}

double MetaGameTable::r_avg(int x) const {
  if (param != Parameterisation::TotalCooperators) {
    throw std::logic_error("meta table: R_avg requires the total parameterisation");
  }
  const int n = n_agents;
  if (x == 0) return r_d(0);
  if (x == n) return r_c(n);
  return (x * r_c(x) + (n - x) * r_d(x)) / static_cast<double>(n);
}

bool MetaGameTable::complete() const {
  for (const MetaCell& c : coop) {
    if (c.feasible && !c.has_data()) return false;
  }
  for (const MetaCell& c : defect) {
    if (c.feasible && !c.has_data()) return false;
  }
  return true;
}

std::vector<std::string> MetaGameTable::gaps() const {
  std::vector<std::string> out;
  for (size_t x = 0; x < coop.size(); ++x) {
    if (coop[x].feasible && !coop[x].has_data()) {
      out.push_back("R_c(" + std::to_string(x) + ")");
    }
  }
  for (size_t x = 0; x < defect.size(); ++x) {
    if (defect[x].feasible && !defect[x].has_data()) {
      out.push_back("R_d(" + std::to_string(x) + ")");
    }
  }
  return out;
}

MetaGameTable build_meta_table(int n_agents, std::span<const ConfigurationSamples> per_x) {
  if (static_cast<int>(per_x.size()) != n_agents + 1) {
    throw std::invalid_argument("build_meta_table: need one sample set per x in 0..N");
  }
  MetaGameTable table;
  table.n_agents = n_agents;
  table.param = Parameterisation::TotalCooperators;
  table.coop.resize(static_cast<size_t>(n_agents) + 1);
  table.defect.resize(static_cast<size_t>(n_agents) + 1);
  for (int x = 0; x <= n_agents; ++x) {
    table.coop[static_cast<size_t>(x)].feasible = x >= 1;
    table.defect[static_cast<size_t>(x)].feasible = x <= n_agents - 1;
    table.coop[static_cast<size_t>(x)].samples = per_x[static_cast<size_t>(x)].cooperate;
    table.defect[static_cast<size_t>(x)].samples = per_x[static_cast<size_t>(x)].defect;
    if (x == 0 && !per_x[0].cooperate.empty()) {
      throw std::invalid_argument("build_meta_table: cooperator samples at x=0");
    }
    if (x == n_agents && !per_x[static_cast<size_t>(x)].defect.empty()) {
      throw std::invalid_argument("build_meta_table: defector samples at x=N");
    }
  }
  return table;
}

MetaGameTable reparameterise(const MetaGameTable& table) {
  const int n = table.n_agents;
  MetaGameTable out;
  out.n_agents = n;
  if (table.param == Parameterisation::TotalCooperators) {
    out.param = Parameterisation::OtherCooperators;
    out.coop.resize(static_cast<size_t>(n));
    out.defect.resize(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
      out.coop[static_cast<size_t>(k)] = table.coop[static_cast<size_t>(k) + 1];
      out.defect[static_cast<size_t>(k)] = table.defect[static_cast<size_t>(k)];
    }
  } else {
    out.param = Parameterisation::TotalCooperators;
    out.coop.resize(static_cast<size_t>(n) + 1);
    out.defect.resize(static_cast<size_t>(n) + 1);
    out.coop[0].feasible = false;
    out.defect[static_cast<size_t>(n)].feasible = false;
    for (int k = 0; k < n; ++k) {
      out.coop[static_cast<size_t>(k) + 1] = table.coop[static_cast<size_t>(k)];
      out.defect[static_cast<size_t>(k)] = table.defect[static_cast<size_t>(k)];
    }
  }
  return out;
}

SSDReport ssd_indicator(const MetaGameTable& table) {
  if (table.param != Parameterisation::TotalCooperators) {
    throw std::logic_error("ssd indicator: requires the total parameterisation");
  }
  const int n = table.n_agents;
  SSDReport report;
  report.c3_lo = 1;
  report.c3_hi = n;
  report.c1 = table.r_c(n) - table.r_d(0);
  report.c2 = table.r_c(n) - table.r_c(1);
  double c3 = -std::numeric_limits<double>::infinity();
  for (int m = 1; m <= n; ++m) {
    c3 = std::max(c3, table.r_d(m - 1) - table.r_c(m));
  }
  report.c3 = c3;
  report.is_ssd = report.c1 > 0.0 && report.c2 > 0.0 && report.c3 > 0.0;
  return report;
}

EquilibriumSet find_equilibria(const MetaGameTable& table) {
  if (table.param != Parameterisation::TotalCooperators) {
    throw std::logic_error("find_equilibria: requires the total parameterisation");
  }
  if (!table.complete()) {
    throw std::invalid_argument("find_equilibria: incomplete table");
  }
  const int n = table.n_agents;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  EquilibriumSet out;
  for (int x = 0; x <= n; ++x) {
    EquilibriumSet::Margin m;
    m.x = x;
    m.coop_stay = x >= 1 ? table.r_c(x) - table.r_d(x - 1) : kInf;
    m.defect_stay = x <= n - 1 ? table.r_d(x) - table.r_c(x + 1) : kInf;
    if (m.coop_stay >= 0.0 && m.defect_stay >= 0.0) {
      out.equilibria.push_back(x);
    }
    out.margins.push_back(m);
  }
  return out;
}

double gini(std::span<const double> values) {
  const size_t n = values.size();
  if (n == 0) throw std::invalid_argument("gini: empty input");
  double total = 0.0;
  for (double v : values) total += v;
  if (total == 0.0) return 0.0;
  double abs_diff_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      abs_diff_sum += std::abs(values[i] - values[j]);
    }
  }
  return abs_diff_sum / (2.0 * static_cast<double>(n) * total);
}

SocialMetrics social_metrics(std::span<const EvalEpisode> episodes, int horizon) {
  if (episodes.empty()) throw std::invalid_argument("social metrics: no episodes");
  if (horizon < 1) throw std::invalid_argument("social metrics: horizon must be >= 1");

  SocialMetrics m;
  for (const EvalEpisode& ep : episodes) {
    const size_t n = ep.raw_return.size();
    double group = 0.0;
    for (double v : ep.raw_return) group += v;
    m.utilitarian += group / static_cast<double>(horizon);
    m.equality += 1.0 - gini(ep.raw_return);

    // Mean positive-reward time step (1-based) per rewarded agent.
    double agent_sum = 0.0;
    int rewarded_agents = 0;
    for (size_t i = 0; i < n; ++i) {
      double t_sum = 0.0;
      int t_count = 0;
      for (size_t t = 0; t < ep.step_raw.size(); ++t) {
        if (ep.step_raw[t][i] > 0.0) {
          t_sum += static_cast<double>(t + 1);
          t_count += 1;
        }
      }
      if (t_count > 0) {
        agent_sum += t_sum / t_count;
        rewarded_agents += 1;
      }
    }
    m.sustainability += rewarded_agents > 0 ? agent_sum / rewarded_agents : 0.0;
  }
  const double inv = 1.0 / static_cast<double>(episodes.size());
  m.utilitarian *= inv;
  m.equality *= inv;
  m.sustainability *= inv;
  return m;
}

Heatmap restraint_heatmap(std::span<const PolicySnapshot> zoo,
                          std::span<const AlgorithmKind> kinds, std::span<const double> rates,
                          double alpha, int eval_steps, int episodes, std::mt19937_64& rng) {
  Heatmap hm;
  hm.kinds.assign(kinds.begin(), kinds.end());
  hm.rates.assign(rates.begin(), rates.end());
  hm.alpha = alpha;
  hm.cells.assign(kinds.size(), std::vector<HeatmapCell>(rates.size()));

  for (size_t ki = 0; ki < kinds.size(); ++ki) {
    for (size_t ri = 0; ri < rates.size(); ++ri) {
      HeatmapCell& cell = hm.cells[ki][ri];
      double sum = 0.0;
      int count = 0;
      for (const PolicySnapshot& snap : zoo) {
        if (snap.kind != kinds[ki] || snap.rate != rates[ri] || snap.alpha != alpha) continue;
        EnvConfig eval_env = snap.train_env;
        eval_env.max_steps = eval_steps;
        const std::vector<double> r = measure_restraint(snap, eval_env, episodes, rng);
        for (double v : r) sum += v;
        count += static_cast<int>(r.size());
        cell.n_seeds += 1;
      }
      if (count > 0) {
        cell.mean_restraint = sum / count;
        cell.missing = false;
      }
    }
  }
  return hm;
}

BootstrapSummary bootstrap_estimate(std::span<const double> samples, int b, double level,
                                    std::mt19937_64& rng) {
  if (samples.empty()) throw std::invalid_argument("bootstrap: empty sample set");
  if (b < 1) throw std::invalid_argument("bootstrap: B must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap: bad level");

  const int n = static_cast<int>(samples.size());
  BootstrapSummary out;
  out.resample_means.reserve(static_cast<size_t>(b));
  for (int rep = 0; rep < b; ++rep) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += samples[static_cast<size_t>(uniform_int(rng, n))];
    out.resample_means.push_back(acc / n);
  }
  double mean_acc = 0.0;
  for (double v : out.resample_means) mean_acc += v;
  out.mean = mean_acc / static_cast<double>(b);

  std::vector<double> sorted = out.resample_means;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = static_cast<size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
  };
  out.ci_low = quantile((1.0 - level) / 2.0);
  out.ci_high = quantile(1.0 - (1.0 - level) / 2.0);

  std::vector<double> distinct(samples.begin(), samples.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  out.effective_sample_size = static_cast<int>(distinct.size());
  return out;
}

std::vector<int> histogram_counts(std::span<const double> values, int bins) {
  if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
  std::vector<int> counts(static_cast<size_t>(bins), 0);
  if (values.empty()) return counts;
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) {
    counts[static_cast<size_t>(bins / 2)] = static_cast<int>(values.size());
    return counts;
  }
  for (double v : values) {
    int idx = static_cast<int>((v - lo) / (hi - lo) * bins);
    idx = std::min(idx, bins - 1);
    counts[static_cast<size_t>(idx)] += 1;
  }
  return counts;
}

}  // namespace cprnet
