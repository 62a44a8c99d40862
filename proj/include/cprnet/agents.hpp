#pragma once

#include <array>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cprnet/env.hpp"
#include "cprnet/graph.hpp"
#include "cprnet/network.hpp"
#include "cprnet/topology.hpp"

namespace cprnet {

// The seven networked actor-critic variants, differing only in what each
// agent observes, shares or communicates:
//   IA2C     - own observation only, critic unconditioned
//   NA2C     - neighbour observations shared
//   FPrint   - NA2C plus neighbours' previous-step policy distributions
//   ConseNet - NA2C plus post-update critic consensus averaging
//   DIAL     - learned messages, summed, added to the hidden state
//   CommNet  - hidden states as messages, mean-pooled into a tanh update
//   NeurComm - learned messages from [hidden, fingerprint, obs], concatenated
enum class AlgorithmKind { IA2C, NA2C, FPrint, ConseNet, DIAL, CommNet, NeurComm };

constexpr std::array<AlgorithmKind, 7> kAllKinds = {
    AlgorithmKind::IA2C,     AlgorithmKind::NA2C, AlgorithmKind::FPrint,
    AlgorithmKind::ConseNet, AlgorithmKind::DIAL, AlgorithmKind::CommNet,
    AlgorithmKind::NeurComm};

const char* to_string(AlgorithmKind kind);
AlgorithmKind kind_from_string(std::string_view name);

bool is_communicative(AlgorithmKind kind);   // DIAL, CommNet, NeurComm
bool uses_neighbour_obs(AlgorithmKind kind); // NA2C, FPrint, ConseNet
bool uses_fingerprints(AlgorithmKind kind);  // FPrint (input), NeurComm (messages)

using Fingerprint = std::array<double, 2>;  // previous-step action distribution
constexpr Fingerprint kUniformFingerprint = {0.5, 0.5};

// Per-position input arithmetic for one agent.
struct AgentLayout {
  AlgorithmKind kind = AlgorithmKind::IA2C;
  int hidden = 64;
  int msg_dim = 8;
  int n_neighbours = 0;

  int actor_input_dim() const;
  int critic_input_dim() const;  // actor layout + one-hot neighbour actions
  int msg_input_dim() const;     // DIAL: hidden; NeurComm: hidden + 2 + 2
  int combine_input_dim() const; // NeurComm: hidden + msg_dim * n_neighbours
};

// One agent's parameters plus optimizer state. Communicative extras are
// empty tensors for kinds that do not use them.
struct AgentModule {
  int id = 0;
  AgentLayout layout;

  DenseLayer actor_l1;
  DenseLayer actor_head;
  DenseLayer critic_l1;
  DenseLayer critic_head;
  DenseLayer msg_enc;       // DIAL, NeurComm
  DenseLayer comm_proj;     // DIAL incoming-sum projection
  Tensor comm_self_w;       // CommNet W_h
  Tensor comm_msg_w;        // CommNet W_c
  Tensor comm_combine_w;    // NeurComm combine over [h, messages]

  Fingerprint fingerprint = kUniformFingerprint;

  std::vector<AdamState> actor_opt;
  std::vector<AdamState> critic_opt;

  static AgentModule init(int id, AlgorithmKind kind, const Topology& topology, int hidden,
                          int msg_dim, std::mt19937_64& rng);

  AlgorithmKind kind() const { return layout.kind; }
  // Manifest order is fixed; it defines the serialized layout.
  std::vector<std::pair<std::string, Tensor*>> named_params();
  std::vector<std::pair<std::string, const Tensor*>> named_params() const;
  std::vector<Tensor*> actor_params();   // includes message-path tensors
  std::vector<Tensor*> critic_params();
  std::vector<Tensor*> all_params();
  void zero_grads();
};

// Actor input layout per information structure. Channels that the kind does
// not declare must be passed empty; mismatches throw.
//   IA2C / DIAL / CommNet / NeurComm: [own_obs]
//   NA2C / ConseNet: [own_obs, neighbour obs ascending id]
//   FPrint: NA2C layout + neighbour fingerprints ascending id
std::vector<double> build_actor_input(AlgorithmKind kind, const Observation& own,
                                      std::span<const Observation> neighbour_obs,
                                      std::span<const Fingerprint> neighbour_fingerprints);

// Critic input: [actor layout, one-hot neighbour actions ascending id]
// with Open = (1,0), Closed = (0,1). IA2C conditions on nothing shared.
std::vector<double> build_critic_input(AlgorithmKind kind, std::span<const double> actor_input,
                                       std::span<const Action> neighbour_actions);

// Collects the declared input channels for agent i of a team from full-team
// observation / fingerprint vectors.
std::vector<double> actor_input_for(const Topology& topology, AlgorithmKind kind, int i,
                                    std::span<const Observation> all_obs,
                                    std::span<const Fingerprint> all_fps);

// One synchronous joint actor pass with within-step differentiable message
// exchange. Graph and plain versions perform identical arithmetic; the plain
// one is used for acting and evaluation, the graph one for updates.
struct TeamForwardGraph {
  std::vector<Graph::Ref> logits;
};
TeamForwardGraph team_actor_forward(Graph& g, std::span<AgentModule* const> team,
                                    const Topology& topology,
                                    std::span<const std::vector<double>> actor_inputs,
                                    std::span<const Observation> all_obs,
                                    std::span<const Fingerprint> all_fps);

std::vector<std::vector<double>> team_actor_logits(std::span<const AgentModule* const> team,
                                                   const Topology& topology,
                                                   std::span<const std::vector<double>> actor_inputs,
                                                   std::span<const Observation> all_obs,
                                                   std::span<const Fingerprint> all_fps);

Graph::Ref critic_forward(Graph& g, AgentModule& agent, std::span<const double> critic_input);
double critic_value(const AgentModule& agent, std::span<const double> critic_input);

struct ActResult {
  Action action = Action::Open;
  double log_prob = 0.0;
  Categorical dist;
};

// Samples (or argmaxes) the categorical head and updates the module's
// fingerprint to the emitted distribution.
ActResult act(AgentModule& agent, std::span<const double> logits, std::mt19937_64& rng,
              bool greedy = false);

}  // namespace cprnet
