#include "cprnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cprnet {

namespace {

// Stable log-sum-exp and softmax over a small logits span.
double log_sum_exp(std::span<const double> logits) {
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  double s = 0.0;
  for (double v : logits) s += std::exp(v - m);
  return m + std::log(s);
}

void softmax_into(std::span<const double> logits, std::span<double> probs) {
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  double s = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - m);
    s += probs[i];
  }
  for (double& p : probs) p /= s;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape_in) : shape(std::move(shape_in)) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  value.assign(static_cast<size_t>(n), 0.0);
  grad.assign(static_cast<size_t>(n), 0.0);
}

void Tensor::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

bool Tensor::all_finite() const {
  for (double v : value) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Graph::reset() {
  nodes_.clear();
  val_.clear();
  grad_.clear();
  args_.clear();
  weights_.clear();
  backward_done_ = false;
}

void Graph::check_ref(Ref r) const {
  if (r < 0 || r >= static_cast<Ref>(nodes_.size())) {
    throw std::logic_error("graph: stale or invalid node ref");
  }
}

const Graph::Node& Graph::node(Ref r) const {
  check_ref(r);
  return nodes_[static_cast<size_t>(r)];
}

std::span<const double> Graph::values(Ref r) const {
  const Node& n = node(r);
  return val(n);
}

Graph::Ref Graph::push(Node n, int len) {
  n.off = static_cast<int>(val_.size());
  n.len = len;
  val_.resize(val_.size() + static_cast<size_t>(len), 0.0);
  grad_.resize(grad_.size() + static_cast<size_t>(len), 0.0);
  nodes_.push_back(n);
  return static_cast<Ref>(nodes_.size() - 1);
}

Graph::Ref Graph::input(std::span<const double> v) {
  Node n{};
  n.op = Op::Input;
  const Ref r = push(n, static_cast<int>(v.size()));
  std::copy(v.begin(), v.end(), val(nodes_.back()).begin());
  return r;
}

Graph::Ref Graph::linear(Tensor& w, Tensor& b, Ref x) {
  const Node& xn = node(x);
  if (w.cols() != xn.len || w.rows() != static_cast<int>(b.value.size())) {
    throw std::invalid_argument("graph linear: shape mismatch");
  }
  Node n{};
  n.op = Op::Linear;
  n.a = x;
  n.w = &w;
  n.bias = &b;
  const Ref r = push(n, w.rows());
  const Node& out = nodes_.back();
  const Node& xin = nodes_[static_cast<size_t>(x)];
  const int rows = w.rows(), cols = w.cols();
  const double* xv = val_.data() + xin.off;
  double* yv = val_.data() + out.off;
  for (int i = 0; i < rows; ++i) {
    const double* wr = w.value.data() + static_cast<std::ptrdiff_t>(i) * cols;
    double acc = b.value[static_cast<size_t>(i)];
    for (int j = 0; j < cols; ++j) acc += wr[j] * xv[j];
    yv[i] = acc;
  }
  return r;
}

Graph::Ref Graph::matvec(Tensor& w, Ref x) {
  const Node& xn = node(x);
  if (w.cols() != xn.len) throw std::invalid_argument("graph matvec: shape mismatch");
  Node n{};
  n.op = Op::MatVec;
  n.a = x;
  n.w = &w;
  const Ref r = push(n, w.rows());
  const Node& out = nodes_.back();
  const Node& xin = nodes_[static_cast<size_t>(x)];
  const int rows = w.rows(), cols = w.cols();
  const double* xv = val_.data() + xin.off;
  double* yv = val_.data() + out.off;
  for (int i = 0; i < rows; ++i) {
    const double* wr = w.value.data() + static_cast<std::ptrdiff_t>(i) * cols;
    double acc = 0.0;
    for (int j = 0; j < cols; ++j) acc += wr[j] * xv[j];
    yv[i] = acc;
  }
  return r;
}

Graph::Ref Graph::relu(Ref x) {
  const Node& xn = node(x);
  Node n{};
  n.op = Op::Relu;
  n.a = x;
  const Ref r = push(n, xn.len);
  const Node& out = nodes_.back();
  const Node& xin = nodes_[static_cast<size_t>(x)];
  for (int i = 0; i < out.len; ++i) {
    val_[static_cast<size_t>(out.off + i)] = std::max(0.0, val_[static_cast<size_t>(xin.off + i)]);
  }
  return r;
}

Graph::Ref Graph::tanh(Ref x) {
  const Node& xn = node(x);
  Node n{};
  n.op = Op::Tanh;
  n.a = x;
  const Ref r = push(n, xn.len);
  const Node& out = nodes_.back();
  const Node& xin = nodes_[static_cast<size_t>(x)];
  for (int i = 0; i < out.len; ++i) {
    val_[static_cast<size_t>(out.off + i)] = std::tanh(val_[static_cast<size_t>(xin.off + i)]);
  }
  return r;
}

Graph::Ref Graph::add(Ref a, Ref b) {
  const Node& an = node(a);
  const Node& bn = node(b);
  if (an.len != bn.len) throw std::invalid_argument("graph add: length mismatch");
  Node n{};
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  const Ref r = push(n, an.len);
  const Node& out = nodes_.back();
  for (int i = 0; i < out.len; ++i) {
    val_[static_cast<size_t>(out.off + i)] =
        val_[static_cast<size_t>(nodes_[static_cast<size_t>(a)].off + i)] +
        val_[static_cast<size_t>(nodes_[static_cast<size_t>(b)].off + i)];
  }
  return r;
}

Graph::Ref Graph::scale(Ref a, double k) {
  const Node& an = node(a);
  Node n{};
  n.op = Op::Scale;
  n.a = a;
  n.k = k;
  const Ref r = push(n, an.len);
  const Node& out = nodes_.back();
  const Node& ain = nodes_[static_cast<size_t>(a)];
  for (int i = 0; i < out.len; ++i) {
    val_[static_cast<size_t>(out.off + i)] = k * val_[static_cast<size_t>(ain.off + i)];
  }
  return r;
}

Graph::Ref Graph::concat(std::span<const Ref> xs) {
  if (xs.empty()) throw std::invalid_argument("graph concat: no inputs");
  int total = 0;
  for (Ref x : xs) total += node(x).len;
  Node n{};
  n.op = Op::Concat;
  n.args_off = static_cast<int>(args_.size());
  n.args_len = static_cast<int>(xs.size());
  args_.insert(args_.end(), xs.begin(), xs.end());
  const Ref r = push(n, total);
  const Node& out = nodes_.back();
  int pos = out.off;
  for (Ref x : xs) {
    const Node& xn = nodes_[static_cast<size_t>(x)];
    std::copy(val_.begin() + xn.off, val_.begin() + xn.off + xn.len, val_.begin() + pos);
    pos += xn.len;
  }
  return r;
}

Graph::Ref Graph::sum_nodes(std::span<const Ref> xs) {
  if (xs.empty()) throw std::invalid_argument("graph sum_nodes: no inputs");
  const int len = node(xs[0]).len;
  for (Ref x : xs) {
    if (node(x).len != len) throw std::invalid_argument("graph sum_nodes: length mismatch");
  }
  Node n{};
  n.op = Op::SumNodes;
  n.args_off = static_cast<int>(args_.size());
  n.args_len = static_cast<int>(xs.size());
  args_.insert(args_.end(), xs.begin(), xs.end());
  const Ref r = push(n, len);
  const Node& out = nodes_.back();
  for (int i = 0; i < len; ++i) {
    double acc = 0.0;
    for (Ref x : xs) acc += val_[static_cast<size_t>(nodes_[static_cast<size_t>(x)].off + i)];
    val_[static_cast<size_t>(out.off + i)] = acc;
  }
  return r;
}

Graph::Ref Graph::mean_nodes(std::span<const Ref> xs) {
  const Ref s = sum_nodes(xs);
  Node& n = nodes_[static_cast<size_t>(s)];
  n.op = Op::MeanNodes;
  const double inv = 1.0 / static_cast<double>(xs.size());
  for (int i = 0; i < n.len; ++i) val_[static_cast<size_t>(n.off + i)] *= inv;
  return s;
}

Graph::Ref Graph::sum_elements(Ref x) {
  const Node& xn = node(x);
  Node n{};
  n.op = Op::SumElems;
  n.a = x;
  const Ref r = push(n, 1);
  const Node& out = nodes_.back();
  const Node& xin = nodes_[static_cast<size_t>(x)];
  double acc = 0.0;
  for (int i = 0; i < xin.len; ++i) acc += val_[static_cast<size_t>(xin.off + i)];
  val_[static_cast<size_t>(out.off)] = acc;
  return r;
}

Graph::Ref Graph::log_prob(Ref logits, int index) {
  const Node& ln = node(logits);
  if (ln.len > 8) throw std::invalid_argument("graph log_prob: head wider than supported");
  if (index < 0 || index >= ln.len) throw std::invalid_argument("graph log_prob: bad index");
  for (int i = 0; i < ln.len; ++i) {
    if (!std::isfinite(val_[static_cast<size_t>(ln.off + i)])) {
      throw std::domain_error("graph log_prob: non-finite logits");
    }
  }
  Node n{};
  n.op = Op::LogProb;
  n.a = logits;
  n.index = index;
  const Ref r = push(n, 1);
  const Node& out = nodes_.back();
  const Node& lin = nodes_[static_cast<size_t>(logits)];
  const std::span<const double> lv{val_.data() + lin.off, static_cast<size_t>(lin.len)};
  val_[static_cast<size_t>(out.off)] = lv[static_cast<size_t>(index)] - log_sum_exp(lv);
  return r;
}

Graph::Ref Graph::entropy(Ref logits) {
  const Node& ln = node(logits);
  if (ln.len > 8) throw std::invalid_argument("graph entropy: head wider than supported");
  for (int i = 0; i < ln.len; ++i) {
    if (!std::isfinite(val_[static_cast<size_t>(ln.off + i)])) {
      throw std::domain_error("graph entropy: non-finite logits");
    }
  }
  Node n{};
  n.op = Op::Entropy;
  n.a = logits;
  const Ref r = push(n, 1);
  const Node& out = nodes_.back();
  const Node& lin = nodes_[static_cast<size_t>(logits)];
  const std::span<const double> lv{val_.data() + lin.off, static_cast<size_t>(lin.len)};
  const double lse = log_sum_exp(lv);
  double h = 0.0;
  for (double l : lv) {
    const double p = std::exp(l - lse);
    if (p > 0.0) h -= p * (l - lse);
  }
  val_[static_cast<size_t>(out.off)] = h;
  return r;
}

Graph::Ref Graph::squared_error(Ref pred, double target) {
  const Node& pn = node(pred);
  if (pn.len != 1) throw std::invalid_argument("graph squared_error: pred must be scalar");
  Node n{};
  n.op = Op::SquaredError;
  n.a = pred;
  n.k = target;
  const Ref r = push(n, 1);
  const Node& out = nodes_.back();
  const double d = target - val_[static_cast<size_t>(nodes_[static_cast<size_t>(pred)].off)];
  val_[static_cast<size_t>(out.off)] = d * d;
  return r;
}

Graph::Ref Graph::weighted_sum(std::span<const Ref> xs, std::span<const double> weights) {
  if (xs.size() != weights.size()) {
    throw std::invalid_argument("graph weighted_sum: arity mismatch");
  }
  for (Ref x : xs) {
    if (node(x).len != 1) throw std::invalid_argument("graph weighted_sum: non-scalar term");
  }
  Node n{};
  n.op = Op::WeightedSum;
  n.args_off = static_cast<int>(args_.size());
  n.args_len = static_cast<int>(xs.size());
  args_.insert(args_.end(), xs.begin(), xs.end());
  n.index = static_cast<int>(weights_.size());
  weights_.insert(weights_.end(), weights.begin(), weights.end());
  const Ref r = push(n, 1);
  const Node& out = nodes_.back();
  double acc = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    acc += weights[i] * val_[static_cast<size_t>(nodes_[static_cast<size_t>(xs[i])].off)];
  }
  val_[static_cast<size_t>(out.off)] = acc;
  return r;
}

void Graph::backward(Ref root) {
  if (backward_done_) {
    throw std::logic_error("graph backward: called twice without a new forward build");
  }
  const Node& rn = node(root);
  if (rn.len != 1) throw std::invalid_argument("graph backward: root must be scalar");
  backward_done_ = true;
  grad_[static_cast<size_t>(rn.off)] = 1.0;

  for (Ref r = static_cast<Ref>(nodes_.size()) - 1; r >= 0; --r) {
    const Node& n = nodes_[static_cast<size_t>(r)];
    const double* g = grad_.data() + n.off;
    switch (n.op) {
      case Op::Input:
        break;
      case Op::Linear:
      case Op::MatVec: {
        const Node& xn = nodes_[static_cast<size_t>(n.a)];
        const int rows = n.w->rows(), cols = n.w->cols();
        const double* xv = val_.data() + xn.off;
        double* xg = grad_.data() + xn.off;
        for (int i = 0; i < rows; ++i) {
          const double gi = g[i];
          if (gi == 0.0) continue;
          double* wg = n.w->grad.data() + static_cast<std::ptrdiff_t>(i) * cols;
          const double* wv = n.w->value.data() + static_cast<std::ptrdiff_t>(i) * cols;
          for (int j = 0; j < cols; ++j) {
            wg[j] += gi * xv[j];
            xg[j] += gi * wv[j];
          }
          if (n.op == Op::Linear) n.bias->grad[static_cast<size_t>(i)] += gi;
        }
        break;
      }
      case Op::Relu: {
        const Node& xn = nodes_[static_cast<size_t>(n.a)];
        for (int i = 0; i < n.len; ++i) {
          if (val_[static_cast<size_t>(xn.off + i)] > 0.0) {
            grad_[static_cast<size_t>(xn.off + i)] += g[i];
          }
        }
        break;
      }
      case Op::Tanh: {
        const Node& xn = nodes_[static_cast<size_t>(n.a)];
        for (int i = 0; i < n.len; ++i) {
          const double y = val_[static_cast<size_t>(n.off + i)];
          grad_[static_cast<size_t>(xn.off + i)] += g[i] * (1.0 - y * y);
        }
        break;
      }
      case Op::Add: {
        const Node& an = nodes_[static_cast<size_t>(n.a)];
        const Node& bn = nodes_[static_cast<size_t>(n.b)];
        for (int i = 0; i < n.len; ++i) {
          grad_[static_cast<size_t>(an.off + i)] += g[i];
          grad_[static_cast<size_t>(bn.off + i)] += g[i];
        }
        break;
      }
      case Op::Scale: {
        const Node& an = nodes_[static_cast<size_t>(n.a)];
        for (int i = 0; i < n.len; ++i) grad_[static_cast<size_t>(an.off + i)] += n.k * g[i];
        break;
      }
      case Op::Concat: {
        int pos = n.off;
        for (int ai = 0; ai < n.args_len; ++ai) {
          const Node& xn = nodes_[static_cast<size_t>(args_[static_cast<size_t>(n.args_off + ai)])];
          for (int i = 0; i < xn.len; ++i) {
            grad_[static_cast<size_t>(xn.off + i)] += grad_[static_cast<size_t>(pos + i)];
          }
          pos += xn.len;
        }
        break;
      }
      case Op::SumElems: {
        const Node& xn = nodes_[static_cast<size_t>(n.a)];
        for (int i = 0; i < xn.len; ++i) grad_[static_cast<size_t>(xn.off + i)] += g[0];
        break;
      }
      case Op::SumNodes:
      case Op::MeanNodes: {
        const double f = n.op == Op::MeanNodes ? 1.0 / static_cast<double>(n.args_len) : 1.0;
        for (int ai = 0; ai < n.args_len; ++ai) {
          const Node& xn = nodes_[static_cast<size_t>(args_[static_cast<size_t>(n.args_off + ai)])];
          for (int i = 0; i < n.len; ++i) {
            grad_[static_cast<size_t>(xn.off + i)] += f * g[i];
          }
        }
        break;
      }
      case Op::LogProb: {
        const Node& ln = nodes_[static_cast<size_t>(n.a)];
        double probs[8];
        softmax_into({val_.data() + ln.off, static_cast<size_t>(ln.len)},
                     {probs, static_cast<size_t>(ln.len)});
        for (int i = 0; i < ln.len; ++i) {
          const double ind = i == n.index ? 1.0 : 0.0;
          grad_[static_cast<size_t>(ln.off + i)] += g[0] * (ind - probs[i]);
        }
        break;
      }
      case Op::Entropy: {
        const Node& ln = nodes_[static_cast<size_t>(n.a)];
        double probs[8];
        softmax_into({val_.data() + ln.off, static_cast<size_t>(ln.len)},
                     {probs, static_cast<size_t>(ln.len)});
        const double h = val_[static_cast<size_t>(n.off)];
        for (int i = 0; i < ln.len; ++i) {
          const double lp = std::log(std::max(probs[i], 1e-300));
          grad_[static_cast<size_t>(ln.off + i)] += g[0] * (-probs[i] * (lp + h));
        }
        break;
      }
      case Op::SquaredError: {
        const Node& pn = nodes_[static_cast<size_t>(n.a)];
        const double pred = val_[static_cast<size_t>(pn.off)];
        grad_[static_cast<size_t>(pn.off)] += g[0] * 2.0 * (pred - n.k);
        break;
      }
      case Op::WeightedSum: {
        for (int ai = 0; ai < n.args_len; ++ai) {
          const Node& xn = nodes_[static_cast<size_t>(args_[static_cast<size_t>(n.args_off + ai)])];
          grad_[static_cast<size_t>(xn.off)] +=
              g[0] * weights_[static_cast<size_t>(n.index + ai)];
        }
        break;
      }
    }
  }
}

}  // namespace cprnet
