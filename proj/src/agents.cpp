#include "cprnet/agents.hpp"

#include <cmath>
#include <stdexcept>

#include "cprnet/rng.hpp"

namespace cprnet {

const char* to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::IA2C: return "IA2C";
    case AlgorithmKind::NA2C: return "NA2C";
    case AlgorithmKind::FPrint: return "FPrint";
    case AlgorithmKind::ConseNet: return "ConseNet";
    case AlgorithmKind::DIAL: return "DIAL";
    case AlgorithmKind::CommNet: return "CommNet";
    case AlgorithmKind::NeurComm: return "NeurComm";
  }
  return "?";
}

AlgorithmKind kind_from_string(std::string_view name) {
  for (AlgorithmKind k : kAllKinds) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown algorithm kind: " + std::string(name));
}

bool is_communicative(AlgorithmKind kind) {
  return kind == AlgorithmKind::DIAL || kind == AlgorithmKind::CommNet ||
         kind == AlgorithmKind::NeurComm;
}

bool uses_neighbour_obs(AlgorithmKind kind) {
  return kind == AlgorithmKind::NA2C || kind == AlgorithmKind::FPrint ||
         kind == AlgorithmKind::ConseNet;
}

bool uses_fingerprints(AlgorithmKind kind) {
  return kind == AlgorithmKind::FPrint || kind == AlgorithmKind::NeurComm;
}

int AgentLayout::actor_input_dim() const {
  switch (kind) {
    case AlgorithmKind::IA2C:
    case AlgorithmKind::DIAL:
    case AlgorithmKind::CommNet:
    case AlgorithmKind::NeurComm:
      return 2;
    case AlgorithmKind::NA2C:
    case AlgorithmKind::ConseNet:
      return 2 * (1 + n_neighbours);
    case AlgorithmKind::FPrint:
      return 2 * (1 + n_neighbours) + 2 * n_neighbours;
  }
  return 0;
}

int AgentLayout::critic_input_dim() const {
  if (kind == AlgorithmKind::IA2C) return actor_input_dim();
  return actor_input_dim() + 2 * n_neighbours;
}

int AgentLayout::msg_input_dim() const {
  switch (kind) {
    case AlgorithmKind::DIAL: return hidden;
    case AlgorithmKind::NeurComm: return hidden + 2 + 2;  // [h, fingerprint, obs]
    default: return 0;
  }
}

int AgentLayout::combine_input_dim() const {
  if (kind != AlgorithmKind::NeurComm) return 0;
  return hidden + msg_dim * n_neighbours;
}

AgentModule AgentModule::init(int id, AlgorithmKind kind, const Topology& topology, int hidden,
                              int msg_dim, std::mt19937_64& rng) {
  AgentModule agent;
  agent.id = id;
  agent.layout = AgentLayout{kind, hidden, msg_dim,
                             static_cast<int>(topology.neighbourhood(id).size())};

  agent.actor_l1 = DenseLayer::init(agent.layout.actor_input_dim(), hidden, rng);
  agent.actor_head = DenseLayer::init(hidden, 2, rng);
  agent.critic_l1 = DenseLayer::init(agent.layout.critic_input_dim(), hidden, rng);
  agent.critic_head = DenseLayer::init(hidden, 1, rng);

  switch (kind) {
    case AlgorithmKind::DIAL:
      agent.msg_enc = DenseLayer::init(agent.layout.msg_input_dim(), msg_dim, rng);
      agent.comm_proj = DenseLayer::init(msg_dim, hidden, rng);
      break;
    case AlgorithmKind::CommNet: {
      const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
      agent.comm_self_w = Tensor({hidden, hidden});
      agent.comm_msg_w = Tensor({hidden, hidden});
      for (double& v : agent.comm_self_w.value) v = uniform_range(rng, -bound, bound);
      for (double& v : agent.comm_msg_w.value) v = uniform_range(rng, -bound, bound);
      break;
    }
    case AlgorithmKind::NeurComm: {
      agent.msg_enc = DenseLayer::init(agent.layout.msg_input_dim(), msg_dim, rng);
      const int in = agent.layout.combine_input_dim();
      const double bound = 1.0 / std::sqrt(static_cast<double>(in));
      agent.comm_combine_w = Tensor({hidden, in});
      for (double& v : agent.comm_combine_w.value) v = uniform_range(rng, -bound, bound);
      break;
    }
    default:
      break;
  }

  for (Tensor* t : agent.actor_params()) agent.actor_opt.push_back(AdamState::for_tensor(*t));
  for (Tensor* t : agent.critic_params()) agent.critic_opt.push_back(AdamState::for_tensor(*t));
  return agent;
}

std::vector<std::pair<std::string, Tensor*>> AgentModule::named_params() {
  std::vector<std::pair<std::string, Tensor*>> out = {
      {"actor_l1.w", &actor_l1.w},     {"actor_l1.b", &actor_l1.b},
      {"actor_head.w", &actor_head.w}, {"actor_head.b", &actor_head.b},
      {"critic_l1.w", &critic_l1.w},   {"critic_l1.b", &critic_l1.b},
      {"critic_head.w", &critic_head.w}, {"critic_head.b", &critic_head.b},
  };
  switch (layout.kind) {
    case AlgorithmKind::DIAL:
      out.emplace_back("msg_enc.w", &msg_enc.w);
      out.emplace_back("msg_enc.b", &msg_enc.b);
      out.emplace_back("comm_proj.w", &comm_proj.w);
      out.emplace_back("comm_proj.b", &comm_proj.b);
      break;
    case AlgorithmKind::CommNet:
      out.emplace_back("comm_self.w", &comm_self_w);
      out.emplace_back("comm_msg.w", &comm_msg_w);
      break;
    case AlgorithmKind::NeurComm:
      out.emplace_back("msg_enc.w", &msg_enc.w);
      out.emplace_back("msg_enc.b", &msg_enc.b);
      out.emplace_back("comm_combine.w", &comm_combine_w);
      break;
    default:
      break;
  }
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> AgentModule::named_params() const {
  auto mutable_list = const_cast<AgentModule*>(this)->named_params();
  std::vector<std::pair<std::string, const Tensor*>> out;
  out.reserve(mutable_list.size());
  for (auto& [name, t] : mutable_list) out.emplace_back(name, t);
  return out;
}

std::vector<Tensor*> AgentModule::actor_params() {
  std::vector<Tensor*> out = {&actor_l1.w, &actor_l1.b, &actor_head.w, &actor_head.b};
  switch (layout.kind) {
    case AlgorithmKind::DIAL:
      out.insert(out.end(), {&msg_enc.w, &msg_enc.b, &comm_proj.w, &comm_proj.b});
      break;
    case AlgorithmKind::CommNet:
      out.insert(out.end(), {&comm_self_w, &comm_msg_w});
      break;
    case AlgorithmKind::NeurComm:
      out.insert(out.end(), {&msg_enc.w, &msg_enc.b, &comm_combine_w});
      break;
    default:
      break;
  }
  return out;
}

std::vector<Tensor*> AgentModule::critic_params() {
  return {&critic_l1.w, &critic_l1.b, &critic_head.w, &critic_head.b};
}

std::vector<Tensor*> AgentModule::all_params() {
  std::vector<Tensor*> out = actor_params();
  for (Tensor* t : critic_params()) out.push_back(t);
  return out;
}

void AgentModule::zero_grads() {
  for (Tensor* t : all_params()) t->zero_grad();
}

std::vector<double> build_actor_input(AlgorithmKind kind, const Observation& own,
                                      std::span<const Observation> neighbour_obs,
                                      std::span<const Fingerprint> neighbour_fingerprints) {
  const bool wants_obs = uses_neighbour_obs(kind);
  const bool wants_fp = kind == AlgorithmKind::FPrint;
  if (!wants_obs && !neighbour_obs.empty()) {
    throw std::invalid_argument(std::string("build_input: ") + to_string(kind) +
                                " does not take neighbour observations");
  }
  if (!wants_fp && !neighbour_fingerprints.empty()) {
    throw std::invalid_argument(std::string("build_input: ") + to_string(kind) +
                                " does not take neighbour fingerprints");
  }
  if (wants_fp && neighbour_fingerprints.size() != neighbour_obs.size()) {
    throw std::invalid_argument("build_input: fingerprint arity must match neighbour count");
  }

  std::vector<double> input;
  input.reserve(2 + 2 * neighbour_obs.size() + 2 * neighbour_fingerprints.size());
  input.push_back(own.water_level);
  input.push_back(own.own_piped);
  for (const Observation& o : neighbour_obs) {
    input.push_back(o.water_level);
    input.push_back(o.own_piped);
  }
  for (const Fingerprint& fp : neighbour_fingerprints) {
    input.push_back(fp[0]);
    input.push_back(fp[1]);
  }
  return input;
}

std::vector<double> build_critic_input(AlgorithmKind kind, std::span<const double> actor_input,
                                       std::span<const Action> neighbour_actions) {
  if (kind == AlgorithmKind::IA2C && !neighbour_actions.empty()) {
    throw std::invalid_argument("critic input: IA2C conditions on no neighbour actions");
  }
  std::vector<double> input(actor_input.begin(), actor_input.end());
  input.reserve(actor_input.size() + 2 * neighbour_actions.size());
  for (Action a : neighbour_actions) {
    input.push_back(a == Action::Open ? 1.0 : 0.0);
    input.push_back(a == Action::Closed ? 1.0 : 0.0);
  }
  return input;
}

std::vector<double> actor_input_for(const Topology& topology, AlgorithmKind kind, int i,
                                    std::span<const Observation> all_obs,
                                    std::span<const Fingerprint> all_fps) {
  std::vector<Observation> neighbour_obs;
  std::vector<Fingerprint> neighbour_fps;
  if (uses_neighbour_obs(kind)) {
    for (int j : topology.neighbourhood(i)) {
      neighbour_obs.push_back(all_obs[static_cast<size_t>(j)]);
      if (kind == AlgorithmKind::FPrint) {
        neighbour_fps.push_back(all_fps[static_cast<size_t>(j)]);
      }
    }
  }
  return build_actor_input(kind, all_obs[static_cast<size_t>(i)], neighbour_obs, neighbour_fps);
}

namespace {

void check_team(std::span<const AgentModule* const> team, const Topology& topology) {
  if (static_cast<int>(team.size()) != topology.node_count()) {
    throw std::invalid_argument("team forward: team size does not match topology");
  }
  for (size_t i = 1; i < team.size(); ++i) {
    if (team[i]->kind() != team[0]->kind()) {
      throw std::invalid_argument("team forward: mixed algorithm kinds");
    }
  }
}

}  // namespace

TeamForwardGraph team_actor_forward(Graph& g, std::span<AgentModule* const> team,
                                    const Topology& topology,
                                    std::span<const std::vector<double>> actor_inputs,
                                    std::span<const Observation> all_obs,
                                    std::span<const Fingerprint> all_fps) {
  check_team({team.data(), team.size()}, topology);
  const AlgorithmKind kind = team[0]->kind();
  const int n = topology.node_count();

  std::vector<Graph::Ref> hidden(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Graph::Ref x = g.input(actor_inputs[static_cast<size_t>(i)]);
    hidden[static_cast<size_t>(i)] = g.relu(team[static_cast<size_t>(i)]->actor_l1.apply(g, x));
  }

  if (is_communicative(kind)) {
    std::vector<Graph::Ref> messages(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      AgentModule& a = *team[static_cast<size_t>(i)];
      switch (kind) {
        case AlgorithmKind::DIAL:
          messages[static_cast<size_t>(i)] = a.msg_enc.apply(g, hidden[static_cast<size_t>(i)]);
          break;
        case AlgorithmKind::CommNet:
          messages[static_cast<size_t>(i)] = hidden[static_cast<size_t>(i)];
          break;
        case AlgorithmKind::NeurComm: {
          const Fingerprint& fp = all_fps[static_cast<size_t>(i)];
          const Observation& o = all_obs[static_cast<size_t>(i)];
          const Graph::Ref extra = g.input({fp[0], fp[1], o.water_level, o.own_piped});
          const std::array<Graph::Ref, 2> parts = {hidden[static_cast<size_t>(i)], extra};
          messages[static_cast<size_t>(i)] = a.msg_enc.apply(g, g.concat(parts));
          break;
        }
        default:
          break;
      }
    }

    std::vector<Graph::Ref> post(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      AgentModule& a = *team[static_cast<size_t>(i)];
      const std::vector<int>& nbrs = topology.neighbourhood(i);
      std::vector<Graph::Ref> incoming;
      incoming.reserve(nbrs.size());
      for (int j : nbrs) incoming.push_back(messages[static_cast<size_t>(j)]);

      switch (kind) {
        case AlgorithmKind::DIAL: {
          if (incoming.empty()) {
            post[static_cast<size_t>(i)] = hidden[static_cast<size_t>(i)];
          } else {
            const Graph::Ref agg = g.sum_nodes(incoming);
            post[static_cast<size_t>(i)] =
                g.add(hidden[static_cast<size_t>(i)], a.comm_proj.apply(g, agg));
          }
          break;
        }
        case AlgorithmKind::CommNet: {
          const Graph::Ref self = g.matvec(a.comm_self_w, hidden[static_cast<size_t>(i)]);
          if (incoming.empty()) {
            post[static_cast<size_t>(i)] = g.tanh(self);
          } else {
            const Graph::Ref pooled = g.mean_nodes(incoming);
            post[static_cast<size_t>(i)] = g.tanh(g.add(self, g.matvec(a.comm_msg_w, pooled)));
          }
          break;
        }
        case AlgorithmKind::NeurComm: {
          std::vector<Graph::Ref> parts = {hidden[static_cast<size_t>(i)]};
          parts.insert(parts.end(), incoming.begin(), incoming.end());
          post[static_cast<size_t>(i)] = g.relu(g.matvec(a.comm_combine_w, g.concat(parts)));
          break;
        }
        default:
          break;
      }
    }
    hidden = std::move(post);
  }

  TeamForwardGraph out;
  out.logits.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.logits[static_cast<size_t>(i)] =
        team[static_cast<size_t>(i)]->actor_head.apply(g, hidden[static_cast<size_t>(i)]);
  }
  return out;
}

std::vector<std::vector<double>> team_actor_logits(std::span<const AgentModule* const> team,
                                                   const Topology& topology,
                                                   std::span<const std::vector<double>> actor_inputs,
                                                   std::span<const Observation> all_obs,
                                                   std::span<const Fingerprint> all_fps) {
  check_team(team, topology);
  const AlgorithmKind kind = team[0]->kind();
  const int n = topology.node_count();

  std::vector<std::vector<double>> hidden(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    hidden[static_cast<size_t>(i)] =
        team[static_cast<size_t>(i)]->actor_l1.apply_plain(actor_inputs[static_cast<size_t>(i)]);
    for (double& v : hidden[static_cast<size_t>(i)]) v = std::max(0.0, v);
  }

  if (is_communicative(kind)) {
    std::vector<std::vector<double>> messages(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      const AgentModule& a = *team[static_cast<size_t>(i)];
      switch (kind) {
        case AlgorithmKind::DIAL:
          messages[static_cast<size_t>(i)] = a.msg_enc.apply_plain(hidden[static_cast<size_t>(i)]);
          break;
        case AlgorithmKind::CommNet:
          messages[static_cast<size_t>(i)] = hidden[static_cast<size_t>(i)];
          break;
        case AlgorithmKind::NeurComm: {
          std::vector<double> msg_in = hidden[static_cast<size_t>(i)];
          const Fingerprint& fp = all_fps[static_cast<size_t>(i)];
          const Observation& o = all_obs[static_cast<size_t>(i)];
          msg_in.insert(msg_in.end(), {fp[0], fp[1], o.water_level, o.own_piped});
          messages[static_cast<size_t>(i)] = a.msg_enc.apply_plain(msg_in);
          break;
        }
        default:
          break;
      }
    }

    std::vector<std::vector<double>> post(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      const AgentModule& a = *team[static_cast<size_t>(i)];
      const std::vector<int>& nbrs = topology.neighbourhood(i);

      switch (kind) {
        case AlgorithmKind::DIAL: {
          if (nbrs.empty()) {
            post[static_cast<size_t>(i)] = hidden[static_cast<size_t>(i)];
          } else {
            std::vector<double> agg(messages[static_cast<size_t>(nbrs[0])].size(), 0.0);
            for (int j : nbrs) {
              const auto& m = messages[static_cast<size_t>(j)];
              for (size_t k = 0; k < agg.size(); ++k) agg[k] += m[k];
            }
            std::vector<double> proj = a.comm_proj.apply_plain(agg);
            post[static_cast<size_t>(i)] = hidden[static_cast<size_t>(i)];
            for (size_t k = 0; k < proj.size(); ++k) post[static_cast<size_t>(i)][k] += proj[k];
          }
          break;
        }
        case AlgorithmKind::CommNet: {
          std::vector<double> acc(static_cast<size_t>(a.layout.hidden), 0.0);
          const int rows = a.comm_self_w.rows(), cols = a.comm_self_w.cols();
          const auto& h = hidden[static_cast<size_t>(i)];
          for (int r = 0; r < rows; ++r) {
            const double* wr = a.comm_self_w.value.data() + static_cast<std::ptrdiff_t>(r) * cols;
            double s = 0.0;
            for (int c = 0; c < cols; ++c) s += wr[c] * h[static_cast<size_t>(c)];
            acc[static_cast<size_t>(r)] = s;
          }
          if (!nbrs.empty()) {
            std::vector<double> pooled(static_cast<size_t>(cols), 0.0);
            for (int j : nbrs) {
              const auto& m = messages[static_cast<size_t>(j)];
              for (size_t k = 0; k < pooled.size(); ++k) pooled[k] += m[k];
            }
            const double inv = 1.0 / static_cast<double>(nbrs.size());
            for (double& v : pooled) v *= inv;
            for (int r = 0; r < rows; ++r) {
              const double* wr = a.comm_msg_w.value.data() + static_cast<std::ptrdiff_t>(r) * cols;
              double s = 0.0;
              for (int c = 0; c < cols; ++c) s += wr[c] * pooled[static_cast<size_t>(c)];
              acc[static_cast<size_t>(r)] += s;
            }
          }
          for (double& v : acc) v = std::tanh(v);
          post[static_cast<size_t>(i)] = std::move(acc);
          break;
        }
        case AlgorithmKind::NeurComm: {
          std::vector<double> cat = hidden[static_cast<size_t>(i)];
          for (int j : nbrs) {
            const auto& m = messages[static_cast<size_t>(j)];
            cat.insert(cat.end(), m.begin(), m.end());
          }
          const int rows = a.comm_combine_w.rows(), cols = a.comm_combine_w.cols();
          std::vector<double> combined(static_cast<size_t>(rows), 0.0);
          for (int r = 0; r < rows; ++r) {
            const double* wr =
                a.comm_combine_w.value.data() + static_cast<std::ptrdiff_t>(r) * cols;
            double s = 0.0;
            for (int c = 0; c < cols; ++c) s += wr[c] * cat[static_cast<size_t>(c)];
            combined[static_cast<size_t>(r)] = std::max(0.0, s);
          }
          post[static_cast<size_t>(i)] = std::move(combined);
          break;
        }
        default:
          break;
      }
    }
    hidden = std::move(post);
  }

  std::vector<std::vector<double>> logits(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    logits[static_cast<size_t>(i)] =
        team[static_cast<size_t>(i)]->actor_head.apply_plain(hidden[static_cast<size_t>(i)]);
  }
  return logits;
}

Graph::Ref critic_forward(Graph& g, AgentModule& agent, std::span<const double> critic_input) {
  if (static_cast<int>(critic_input.size()) != agent.layout.critic_input_dim()) {
    throw std::invalid_argument("critic input arity does not match topology");
  }
  const Graph::Ref x = g.input(critic_input);
  return agent.critic_head.apply(g, g.relu(agent.critic_l1.apply(g, x)));
}

double critic_value(const AgentModule& agent, std::span<const double> critic_input) {
  if (static_cast<int>(critic_input.size()) != agent.layout.critic_input_dim()) {
    throw std::invalid_argument("critic input arity does not match topology");
  }
  std::vector<double> h = agent.critic_l1.apply_plain(critic_input);
  for (double& v : h) v = std::max(0.0, v);
  return agent.critic_head.apply_plain(h)[0];
}

ActResult act(AgentModule& agent, std::span<const double> logits, std::mt19937_64& rng,
              bool greedy) {
  ActResult r;
  r.dist = Categorical::from_logits(logits);
  const int a = greedy ? r.dist.argmax() : r.dist.sample(rng);
  r.action = static_cast<Action>(a);
  r.log_prob = r.dist.log_prob(a);
  agent.fingerprint = {r.dist.probs[0], r.dist.probs[1]};
  return r;
}

}  // namespace cprnet
