#include <doctest.h>

#include <cmath>
#include <random>

#include "cprnet/graph.hpp"

using namespace cprnet;

TEST_CASE("identity linear layer reproduces its input") {
  Tensor w({2, 2});
  w.value = {1.0, 0.0, 0.0, 1.0};
  Tensor b({2});
  Graph g;
  const auto y = g.linear(w, b, g.input({1.0, 2.0}));
  CHECK(g.values(y)[0] == 1.0);
  CHECK(g.values(y)[1] == 2.0);
}

TEST_CASE("relu clips negatives") {
  Graph g;
  const auto y = g.relu(g.input({-1.0, 3.0}));
  CHECK(g.values(y)[0] == 0.0);
  CHECK(g.values(y)[1] == 3.0);
}

TEST_CASE("two-layer net matches hand-evaluated arithmetic") {
  // y = W2 * relu(W1 x + b1) + b2 with hand-set weights.
  Tensor w1({2, 2});
  w1.value = {1.0, -1.0, 0.5, 2.0};
  Tensor b1({2});
  b1.value = {0.25, -0.5};
  Tensor w2({1, 2});
  w2.value = {3.0, -2.0};
  Tensor b2({1});
  b2.value = {0.125};

  Graph g;
  const auto x = g.input({2.0, 1.0});
  const auto h = g.relu(g.linear(w1, b1, x));
  const auto y = g.linear(w2, b2, h);
  // h_pre = (2-1+0.25, 1+2-0.5) = (1.25, 2.5); y = 3*1.25 - 2*2.5 + 0.125
  CHECK(g.values(y)[0] == doctest::Approx(3.75 - 5.0 + 0.125).epsilon(1e-15));
}

TEST_CASE("zero-scaled loss yields zero gradients") {
  Tensor w({2, 2});
  w.value = {0.3, -0.2, 0.7, 0.1};
  Tensor b({2});
  Graph g;
  const auto y = g.linear(w, b, g.input({1.0, 2.0}));
  const auto loss = g.scale(g.sum_elements(y), 0.0);
  g.backward(loss);
  for (double v : w.grad) CHECK(v == 0.0);
  for (double v : b.grad) CHECK(v == 0.0);
}

TEST_CASE("sum over identity layer puts the input in the weight gradient") {
  Tensor w({2, 2});
  w.value = {1.0, 0.0, 0.0, 1.0};
  Tensor b({2});
  Graph g;
  const auto y = g.linear(w, b, g.input({3.0, 5.0}));
  g.backward(g.sum_elements(y));
  CHECK(w.grad == std::vector<double>{3.0, 5.0, 3.0, 5.0});
  CHECK(b.grad == std::vector<double>{1.0, 1.0});
}

TEST_CASE("backward twice without a new forward is an error") {
  Tensor w({1, 1});
  w.value = {2.0};
  Tensor b({1});
  Graph g;
  const auto y = g.linear(w, b, g.input({1.0}));
  g.backward(y);
  CHECK_THROWS_AS(g.backward(y), std::logic_error);
  g.reset();
  const auto y2 = g.linear(w, b, g.input({1.0}));
  CHECK_NOTHROW(g.backward(y2));
}

TEST_CASE("log_prob and entropy values and gradients") {
  Graph g;
  const auto logits = g.input({1.0, 0.0});
  const auto lp = g.log_prob(logits, 0);
  const double p0 = std::exp(1.0) / (std::exp(1.0) + 1.0);
  CHECK(g.value(lp) == doctest::Approx(std::log(p0)).epsilon(1e-12));

  const auto h = g.entropy(logits);
  const double expected_h = -(p0 * std::log(p0) + (1 - p0) * std::log(1 - p0));
  CHECK(g.value(h) == doctest::Approx(expected_h).epsilon(1e-12));
}

TEST_CASE("uniform logits give ln 2 entropy") {
  Graph g;
  const auto h = g.entropy(g.input({0.0, 0.0}));
  CHECK(g.value(h) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("degenerate logits give near-zero entropy and certain action") {
  Graph g;
  const auto logits = g.input({10.0, -40.0});
  const auto lp = g.log_prob(logits, 0);
  CHECK(g.value(lp) == doctest::Approx(0.0).epsilon(1e-12));
  const auto h = g.entropy(g.input({10.0, -40.0}));
  CHECK(g.value(h) < 1e-12);
}

TEST_CASE("non-finite logits are rejected") {
  Graph g;
  const auto bad = g.input({std::numeric_limits<double>::quiet_NaN(), 0.0});
  CHECK_THROWS_AS(g.log_prob(bad, 0), std::domain_error);
  CHECK_THROWS_AS(g.entropy(bad), std::domain_error);
}

TEST_CASE("concat sum mean and weighted_sum propagate gradients") {
  Tensor w({2, 2});
  w.value = {0.5, 1.0, -1.0, 2.0};
  Tensor b({2});
  b.value = {0.1, 0.2};
  Graph g;
  const auto a = g.linear(w, b, g.input({1.0, -1.0}));
  const auto c = g.linear(w, b, g.input({2.0, 0.5}));
  const auto m = g.mean_nodes(std::array<Graph::Ref, 2>{a, c});
  const auto s = g.sum_nodes(std::array<Graph::Ref, 2>{a, m});
  const auto cat = g.concat(std::array<Graph::Ref, 2>{s, a});
  const auto total = g.sum_elements(cat);
  g.backward(total);
  // Finite-difference spot check on w[0].
  const double base = g.value(total);
  const double eps = 1e-6;
  auto eval = [&]() {
    Graph g2;
    const auto a2 = g2.linear(w, b, g2.input({1.0, -1.0}));
    const auto c2 = g2.linear(w, b, g2.input({2.0, 0.5}));
    const auto m2 = g2.mean_nodes(std::array<Graph::Ref, 2>{a2, c2});
    const auto s2 = g2.sum_nodes(std::array<Graph::Ref, 2>{a2, m2});
    const auto cat2 = g2.concat(std::array<Graph::Ref, 2>{s2, a2});
    return g2.value(g2.sum_elements(cat2));
  };
  CHECK(eval() == base);
  w.value[0] += eps;
  const double up = eval();
  w.value[0] -= 2 * eps;
  const double down = eval();
  w.value[0] += eps;
  CHECK(w.grad[0] == doctest::Approx((up - down) / (2 * eps)).epsilon(1e-6));
}

TEST_CASE("squared error value and gradient") {
  Tensor w({1, 1});
  w.value = {3.0};
  Tensor b({1});
  Graph g;
  const auto v = g.linear(w, b, g.input({1.0}));
  const auto loss = g.squared_error(v, 5.0);
  CHECK(g.value(loss) == doctest::Approx(4.0));
  g.backward(loss);
  // d/dw (5 - w)^2 = 2(w - 5) = -4
  CHECK(w.grad[0] == doctest::Approx(-4.0));
}
