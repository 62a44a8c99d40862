#include "cprnet/serialize.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace cprnet {

using nlohmann::json;

nlohmann::json env_config_to_json(const EnvConfig& config) {
  json j;
  j["n_agents"] = config.n_agents;
  j["w0"] = config.w0;
  j["total_flow"] = config.total_flow;
  j["regen_rate"] = config.regen_rate;
  if (std::isinf(config.w_max)) {
    j["w_max"] = "unbounded";
  } else {
    j["w_max"] = config.w_max;
  }
  j["max_steps"] = config.max_steps;
  j["alpha"] = config.alpha;
  const std::string preset = config.topology.preset_name();
  if (preset == "custom") {
    json edges = json::array();
    for (auto [a, b] : config.topology.edges()) edges.push_back(json::array({a, b}));
    j["topology"] = json{{"preset", "custom"}, {"edges", edges}};
  } else {
    j["topology"] = preset;
  }
  return j;
}

EnvConfig env_config_from_json(const nlohmann::json& j) {
  EnvConfig config;
  config.n_agents = j.value("n_agents", config.n_agents);
  config.w0 = j.value("w0", config.w0);
  config.total_flow = j.value("total_flow", config.total_flow);
  config.regen_rate = j.value("regen_rate", config.regen_rate);
  if (j.contains("w_max")) {
    if (j["w_max"].is_string()) {
      if (j["w_max"].get<std::string>() != "unbounded") {
        throw std::invalid_argument("env config: w_max must be a number or \"unbounded\"");
      }
      config.w_max = kUnboundedCapacity;
    } else {
      config.w_max = j["w_max"].get<double>();
    }
  }
  config.max_steps = j.value("max_steps", config.max_steps);
  config.alpha = j.value("alpha", config.alpha);
  if (j.contains("topology")) {
    const json& t = j["topology"];
    if (t.is_string()) {
      config.topology = Topology::preset(t.get<std::string>(), config.n_agents);
    } else {
      std::vector<std::pair<int, int>> edges;
      for (const json& e : t.at("edges")) {
        edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
      }
      config.topology = Topology(config.n_agents, std::move(edges));
    }
  } else {
    config.topology = Topology::complete(config.n_agents);
  }
  config.validate();
  return config;
}

nlohmann::json snapshot_to_json(const PolicySnapshot& snapshot) {
  json j;
  j["format"] = "cprnet-snapshot-v1";
  j["kind"] = to_string(snapshot.kind);
  j["rate"] = snapshot.rate;
  j["alpha"] = snapshot.alpha;
  j["seed"] = snapshot.seed;
  j["episodes"] = snapshot.episodes;
  j["hidden"] = snapshot.hidden;
  j["msg_dim"] = snapshot.msg_dim;
  j["config_hash"] = snapshot.config_hash;
  j["env"] = env_config_to_json(snapshot.train_env);
  if (snapshot.evaluated()) {
    j["restraint"] = snapshot.restraint;
    json labels = json::array();
    for (PolicyLabel l : snapshot.labels) labels.push_back(to_string(l));
    j["labels"] = labels;
  }
  json agents = json::array();
  for (const AgentModule& agent : snapshot.agents) {
    json params = json::array();
    for (const auto& [name, tensor] : agent.named_params()) {
      params.push_back(json{{"name", name}, {"shape", tensor->shape}, {"values", tensor->value}});
    }
    agents.push_back(json{{"id", agent.id}, {"params", params}});
  }
  j["agents"] = agents;
  return j;
}

PolicySnapshot snapshot_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "cprnet-snapshot-v1") {
    throw std::invalid_argument("snapshot: unknown format tag");
  }
  PolicySnapshot snap;
  snap.kind = kind_from_string(j.at("kind").get<std::string>());
  snap.rate = j.at("rate").get<double>();
  snap.alpha = j.at("alpha").get<double>();
  snap.seed = j.at("seed").get<std::uint64_t>();
  snap.episodes = j.at("episodes").get<int>();
  snap.hidden = j.at("hidden").get<int>();
  snap.msg_dim = j.at("msg_dim").get<int>();
  snap.config_hash = j.value("config_hash", "");
  snap.train_env = env_config_from_json(j.at("env"));
  if (j.contains("restraint")) {
    snap.restraint = j.at("restraint").get<std::vector<double>>();
    for (const json& l : j.at("labels")) {
      snap.labels.push_back(label_from_string(l.get<std::string>()));
    }
  }

  std::mt19937_64 shape_rng(0);  // layout construction only; values overwritten
  snap.agents.reserve(j.at("agents").size());
  for (const json& ja : j.at("agents")) {
    const int id = ja.at("id").get<int>();
    AgentModule agent = AgentModule::init(id, snap.kind, snap.train_env.topology, snap.hidden,
                                          snap.msg_dim, shape_rng);
    auto named = agent.named_params();
    const json& params = ja.at("params");
    if (params.size() != named.size()) {
      throw std::invalid_argument("snapshot: parameter manifest mismatch");
    }
    for (size_t p = 0; p < named.size(); ++p) {
      const json& jp = params[p];
      if (jp.at("name").get<std::string>() != named[p].first) {
        throw std::invalid_argument("snapshot: unexpected parameter name " +
                                    jp.at("name").get<std::string>());
      }
      const auto shape = jp.at("shape").get<std::vector<int>>();
      if (shape != named[p].second->shape) {
        throw std::invalid_argument("snapshot: shape mismatch for " + named[p].first);
      }
      const auto values = jp.at("values").get<std::vector<double>>();
      if (values.size() != named[p].second->value.size()) {
        throw std::invalid_argument("snapshot: value count mismatch for " + named[p].first);
      }
      named[p].second->value = values;
    }
    snap.agents.push_back(std::move(agent));
  }
  return snap;
}

void save_snapshot(const PolicySnapshot& snapshot, const std::filesystem::path& path) {
  atomic_write_file(path, snapshot_to_json(snapshot).dump(2) + "\n");
}

PolicySnapshot load_snapshot(const std::filesystem::path& path) {
  return snapshot_from_json(json::parse(read_file(path)));
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

}  // namespace cprnet
