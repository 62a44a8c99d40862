#include "cprnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cprnet/rng.hpp"

namespace cprnet {

void NetworkSpec::validate() const {
  if (input_dim < 1) throw std::invalid_argument("network spec: input_dim must be >= 1");
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("network spec: hidden sizes must be >= 1");
  }
}

DenseLayer DenseLayer::init(int in, int out, std::mt19937_64& rng) {
  DenseLayer layer;
  layer.w = Tensor({out, in});
  layer.b = Tensor({out});
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& v : layer.w.value) v = uniform_range(rng, -bound, bound);
  return layer;
}

std::vector<double> DenseLayer::apply_plain(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != w.cols()) {
    throw std::invalid_argument("dense layer: input dim mismatch");
  }
  std::vector<double> y(static_cast<size_t>(w.rows()));
  const int rows = w.rows(), cols = w.cols();
  for (int i = 0; i < rows; ++i) {
    const double* wr = w.value.data() + static_cast<std::ptrdiff_t>(i) * cols;
    double acc = b.value[static_cast<size_t>(i)];
    for (int j = 0; j < cols; ++j) acc += wr[j] * x[static_cast<size_t>(j)];
    y[static_cast<size_t>(i)] = acc;
  }
  return y;
}

Mlp Mlp::init(const NetworkSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  Mlp net;
  net.spec = spec;
  int in = spec.input_dim;
  for (int h : spec.hidden) {
    net.layers.push_back(DenseLayer::init(in, h, rng));
    in = h;
  }
  net.layers.push_back(DenseLayer::init(in, spec.head_dim(), rng));
  return net;
}

Graph::Ref Mlp::forward(Graph& g, Graph::Ref x) {
  Graph::Ref h = x;
  for (size_t i = 0; i + 1 < layers.size(); ++i) {
    h = g.relu(layers[i].apply(g, h));
  }
  return layers.back().apply(g, h);
}

std::vector<double> Mlp::forward_plain(std::span<const double> x) const {
  std::vector<double> h(x.begin(), x.end());
  for (size_t i = 0; i + 1 < layers.size(); ++i) {
    h = layers[i].apply_plain(h);
    for (double& v : h) v = std::max(0.0, v);
  }
  return layers.back().apply_plain(h);
}

std::vector<Tensor*> Mlp::params() {
  std::vector<Tensor*> out;
  for (DenseLayer& l : layers) {
    out.push_back(&l.w);
    out.push_back(&l.b);
  }
  return out;
}

Categorical Categorical::from_logits(std::span<const double> logits_in) {
  for (double l : logits_in) {
    if (!std::isfinite(l)) throw std::domain_error("categorical: non-finite logits");
  }
  Categorical d;
  d.logits.assign(logits_in.begin(), logits_in.end());
  double m = d.logits[0];
  for (double l : d.logits) m = std::max(m, l);
  d.probs.resize(d.logits.size());
  double s = 0.0;
  for (size_t i = 0; i < d.logits.size(); ++i) {
    d.probs[i] = std::exp(d.logits[i] - m);
    s += d.probs[i];
  }
  for (double& p : d.probs) p /= s;
  return d;
}

double Categorical::log_prob(int action) const {
  double m = logits[0];
  for (double l : logits) m = std::max(m, l);
  double s = 0.0;
  for (double l : logits) s += std::exp(l - m);
  return logits[static_cast<size_t>(action)] - m - std::log(s);
}

double Categorical::entropy() const {
  double h = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) h -= probs[i] * log_prob(static_cast<int>(i));
  }
  return h;
}

int Categorical::sample(std::mt19937_64& rng) const {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

int Categorical::argmax() const {
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

AdamState AdamState::for_tensor(const Tensor& t) {
  AdamState s;
  s.m.assign(t.value.size(), 0.0);
  s.v.assign(t.value.size(), 0.0);
  return s;
}

void adam_step(Tensor& p, AdamState& s, const AdamConfig& cfg) {
  if (s.m.size() != p.value.size() || p.grad.size() != p.value.size()) {
    throw std::invalid_argument("adam: state/parameter shape mismatch");
  }
  s.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(s.step));
  for (size_t i = 0; i < p.value.size(); ++i) {
    const double g = p.grad[i];
    s.m[i] = cfg.beta1 * s.m[i] + (1.0 - cfg.beta1) * g;
    s.v[i] = cfg.beta2 * s.v[i] + (1.0 - cfg.beta2) * g * g;
    const double mhat = s.m[i] / bc1;
    const double vhat = s.v[i] / bc2;
    p.value[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

double grad_check(const std::function<double()>& loss_value,
                  const std::function<void()>& compute_grads,
                  std::span<Tensor* const> params, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be > 0");
  compute_grads();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (Tensor* p : params) analytic.push_back(p->grad);

  double max_rel = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& p = *params[pi];
    for (size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + eps;
      const double f_plus = loss_value();
      p.value[i] = saved - eps;
      const double f_minus = loss_value();
      p.value[i] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * eps);
      const double a = analytic[pi][i];
      const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a));
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

double grad_check_mlp(Mlp& net, std::span<const double> input, double eps) {
  const std::vector<Tensor*> params = net.params();
  auto loss_value = [&]() {
    const std::vector<double> out = net.forward_plain(input);
    double s = 0.0;
    for (double v : out) s += v;
    return s;
  };
  auto compute_grads = [&]() {
    for (Tensor* p : params) p->zero_grad();
    Graph g;
    const Graph::Ref x = g.input(input);
    const Graph::Ref y = net.forward(g, x);
    g.backward(g.sum_elements(y));
  };
  return grad_check(loss_value, compute_grads, params, eps);
}

}  // namespace cprnet
