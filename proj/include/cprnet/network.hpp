#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cprnet/graph.hpp"

namespace cprnet {

enum class HeadKind { CategoricalLogits, ScalarValue };

// Layer sizes for a feedforward net: input -> hidden (relu each) -> head.
struct NetworkSpec {
  int input_dim = 0;
  std::vector<int> hidden;
  HeadKind head = HeadKind::ScalarValue;

  int head_dim() const { return head == HeadKind::CategoricalLogits ? 2 : 1; }
  void validate() const;
};

struct DenseLayer {
  Tensor w;  // [out, in]
  Tensor b;  // [out]

  static DenseLayer init(int in, int out, std::mt19937_64& rng);
  Graph::Ref apply(Graph& g, Graph::Ref x) { return g.linear(w, b, x); }
  std::vector<double> apply_plain(std::span<const double> x) const;
  int in_dim() const { return w.cols(); }
  int out_dim() const { return w.rows(); }
};

// Relu between layers, linear head.
struct Mlp {
  NetworkSpec spec;
  std::vector<DenseLayer> layers;

  static Mlp init(const NetworkSpec& spec, std::mt19937_64& rng);
  Graph::Ref forward(Graph& g, Graph::Ref x);
  std::vector<double> forward_plain(std::span<const double> x) const;
  std::vector<Tensor*> params();
};

// Binary-action categorical head built from logits. Throws on non-finite
// logits. Probabilities sum to 1 by construction.
struct Categorical {
  std::vector<double> logits;
  std::vector<double> probs;

  static Categorical from_logits(std::span<const double> logits);
  double log_prob(int action) const;
  double entropy() const;
  int sample(std::mt19937_64& rng) const;
  int argmax() const;
};

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  static AdamState for_tensor(const Tensor& t);
};

// Bias-corrected adaptive-moment update from p.grad; the caller clears grads.
void adam_step(Tensor& p, AdamState& s, const AdamConfig& cfg);

// Max over parameter coordinates of
//   |analytic - central difference| / max(1e-8, |analytic|).
// compute_grads must zero grads, run forward + backward once; loss_value must
// evaluate the same scalar at the current parameter values.
double grad_check(const std::function<double()>& loss_value,
                  const std::function<void()>& compute_grads,
                  std::span<Tensor* const> params, double eps);

// Convenience wrapper: checks d(sum of outputs)/d(params) for an Mlp at a
// fixed input.
double grad_check_mlp(Mlp& net, std::span<const double> input, double eps);

}  // namespace cprnet
