#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace cprnet {

// Parameter block: a flat double array with shape metadata and a gradient
// buffer of the same size. Gradients accumulate across every use of the
// tensor in a graph and are cleared explicitly by the optimizer step.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;

  Tensor() = default;
  explicit Tensor(std::vector<int> shape_in);

  std::int64_t size() const { return static_cast<std::int64_t>(value.size()); }
  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  void zero_grad();
  bool all_finite() const;
};

// Reverse-mode tape over vector-valued nodes. Values and gradients live in
// two flat arenas so reset() keeps capacity across rollout segments. Node
// creation order is a topological order, so backward() is a single reverse
// sweep. One backward per forward build; a second call without reset()
// throws, as do reads of stale refs.
class Graph {
 public:
  using Ref = std::int32_t;

  void reset();
  int node_count() const { return static_cast<int>(nodes_.size()); }

  Ref input(std::span<const double> v);
  Ref input(std::initializer_list<double> v) { return input(std::span<const double>(v)); }
  Ref scalar_input(double v) { return input({v}); }

  // w rows x cols, row-major. linear = w*x + b, matvec = w*x.
  Ref linear(Tensor& w, Tensor& b, Ref x);
  Ref matvec(Tensor& w, Ref x);
  Ref relu(Ref x);
  Ref tanh(Ref x);
  Ref add(Ref a, Ref b);
  Ref scale(Ref a, double k);
  Ref concat(std::span<const Ref> xs);
  Ref sum_nodes(std::span<const Ref> xs);   // elementwise, all same length
  Ref mean_nodes(std::span<const Ref> xs);  // elementwise
  Ref sum_elements(Ref x);                  // scalar: sum of x's components
  Ref log_prob(Ref logits, int index);      // scalar: log softmax(logits)[index]
  Ref entropy(Ref logits);                  // scalar: categorical entropy
  Ref squared_error(Ref pred, double target);  // scalar: (target - pred[0])^2
  // scalar: sum_i weights[i] * xs[i][0]; xs must be scalar nodes
  Ref weighted_sum(std::span<const Ref> xs, std::span<const double> weights);

  double value(Ref r) const { return values(r)[0]; }
  std::span<const double> values(Ref r) const;

  // Seeds d(root)/d(root) = 1 and accumulates into every reachable Tensor's
  // grad field. root must be a scalar node.
  void backward(Ref root);

 private:
  enum class Op : std::uint8_t {
    Input,
    Linear,
    MatVec,
    Relu,
    Tanh,
    Add,
    Scale,
    Concat,
    SumNodes,
    MeanNodes,
    SumElems,
    LogProb,
    Entropy,
    SquaredError,
    WeightedSum,
  };

  struct Node {
    Op op;
    Ref a = -1;
    Ref b = -1;
    Tensor* w = nullptr;
    Tensor* bias = nullptr;
    int index = 0;        // log_prob action index
    double k = 0.0;       // scale factor / squared_error target
    int args_off = 0;     // variadic parents in args_
    int args_len = 0;
    int off = 0;          // value/grad arena offset
    int len = 0;
  };

  Ref push(Node n, int len);
  std::span<double> val(const Node& n) { return {val_.data() + n.off, static_cast<size_t>(n.len)}; }
  std::span<double> grd(const Node& n) { return {grad_.data() + n.off, static_cast<size_t>(n.len)}; }
  std::span<const double> val(const Node& n) const {
    return {val_.data() + n.off, static_cast<size_t>(n.len)};
  }
  const Node& node(Ref r) const;
  void check_ref(Ref r) const;

  std::vector<Node> nodes_;
  std::vector<double> val_;
  std::vector<double> grad_;
  std::vector<Ref> args_;
  std::vector<double> weights_;
  bool backward_done_ = false;
};

}  // namespace cprnet
