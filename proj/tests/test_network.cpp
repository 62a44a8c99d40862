#include <doctest.h>

#include <cmath>
#include <random>

#include "cprnet/network.hpp"
#include "cprnet/rng.hpp"

using namespace cprnet;

TEST_CASE("softmax head is a probability vector for random finite logits") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const double a = uniform_range(rng, -30.0, 30.0);
    const double b = uniform_range(rng, -30.0, 30.0);
    const Categorical d = Categorical::from_logits(std::array<double, 2>{a, b});
    CHECK(d.probs[0] >= 0.0);
    CHECK(d.probs[1] >= 0.0);
    CHECK(std::abs(d.probs[0] + d.probs[1] - 1.0) <= 1e-12);
    const double h = d.entropy();
    CHECK(h >= -1e-12);
    CHECK(h <= std::log(2.0) + 1e-12);
  }
}

TEST_CASE("categorical worked examples") {
  const Categorical uniform = Categorical::from_logits(std::array<double, 2>{0.0, 0.0});
  CHECK(uniform.probs[0] == doctest::Approx(0.5));
  CHECK(uniform.entropy() == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const Categorical skewed = Categorical::from_logits(std::array<double, 2>{1.0, 0.0});
  CHECK(skewed.probs[0] == doctest::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK(skewed.probs[1] == doctest::Approx(0.2689414213699951).epsilon(1e-12));

  const Categorical degen = Categorical::from_logits(std::array<double, 2>{30.0, -20.0});
  CHECK(degen.probs[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(degen.entropy() == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(
      Categorical::from_logits(std::array<double, 2>{std::nan(""), 0.0}), std::domain_error);
}

TEST_CASE("greedy argmax picks the larger logit") {
  const Categorical d = Categorical::from_logits(std::array<double, 2>{2.0, 1.0});
  CHECK(d.argmax() == 0);
}

TEST_CASE("sampling is reproducible and roughly calibrated") {
  const Categorical d = Categorical::from_logits(std::array<double, 2>{0.0, 0.0});
  std::mt19937_64 rng1(11), rng2(11);
  int ones = 0;
  for (int i = 0; i < 2000; ++i) {
    const int a = d.sample(rng1);
    CHECK(a == d.sample(rng2));
    ones += a;
  }
  CHECK(ones > 800);
  CHECK(ones < 1200);
}

TEST_CASE("adam fixed points and descent direction") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    Tensor p({2});
    p.value = {1.0, -2.0};
    AdamState s = AdamState::for_tensor(p);
    adam_step(p, s, AdamConfig{});
    CHECK(p.value == std::vector<double>{1.0, -2.0});
  }
  SUBCASE("single step moves against the gradient sign") {
    Tensor p({1});
    p.value = {0.0};
    p.grad = {2.5};
    AdamState s = AdamState::for_tensor(p);
    adam_step(p, s, AdamConfig{1e-3, 0.9, 0.999, 1e-8});
    CHECK(p.value[0] < 0.0);
  }
  SUBCASE("two steps match the hand-computed recurrences") {
    const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    Tensor p({1});
    p.value = {1.0};
    AdamState s = AdamState::for_tensor(p);

    double m = 0.0, v = 0.0, x = 1.0;
    for (int t = 1; t <= 2; ++t) {
      const double g = 3.0;
      p.grad = {g};
      adam_step(p, s, AdamConfig{lr, b1, b2, eps});
      m = b1 * m + (1 - b1) * g;
      v = b2 * v + (1 - b2) * g * g;
      const double mhat = m / (1 - std::pow(b1, t));
      const double vhat = v / (1 - std::pow(b2, t));
      x -= lr * mhat / (std::sqrt(vhat) + eps);
      CHECK(p.value[0] == doctest::Approx(x).epsilon(1e-15));
    }
  }
}

TEST_CASE("finite differences confirm mlp gradients") {
  std::mt19937_64 rng(3);

  SUBCASE("purely linear net is exact to first order") {
    NetworkSpec spec{2, {}, HeadKind::ScalarValue};
    Mlp net = Mlp::init(spec, rng);
    const double err = grad_check_mlp(net, std::array<double, 2>{0.4, -1.2}, 1e-5);
    CHECK(err < 1e-6);
  }
  SUBCASE("relu net away from kinks") {
    NetworkSpec spec{3, {16, 8}, HeadKind::CategoricalLogits};
    Mlp net = Mlp::init(spec, rng);
    const double err = grad_check_mlp(net, std::array<double, 3>{0.9, -0.3, 1.7}, 1e-5);
    CHECK(err < 1e-4);
  }
  SUBCASE("zero network has zero analytic and numeric gradients on the head") {
    NetworkSpec spec{2, {4}, HeadKind::ScalarValue};
    Mlp net = Mlp::init(spec, rng);
    for (Tensor* t : net.params()) {
      std::fill(t->value.begin(), t->value.end(), 0.0);
    }
    const std::array<double, 2> input = {0.7, 0.1};
    CHECK(net.forward_plain(input)[0] == 0.0);
    const double err = grad_check_mlp(net, input, 1e-5);
    CHECK(err == 0.0);  // both sides vanish; relative error is exactly zero
  }
}

TEST_CASE("graph and plain forward agree exactly") {
  std::mt19937_64 rng(17);
  NetworkSpec spec{4, {8, 8}, HeadKind::CategoricalLogits};
  Mlp net = Mlp::init(spec, rng);
  const std::array<double, 4> input = {0.2, -0.6, 1.4, 0.0};
  Graph g;
  const auto y = net.forward(g, g.input(input));
  const auto plain = net.forward_plain(input);
  REQUIRE(plain.size() == g.values(y).size());
  for (size_t i = 0; i < plain.size(); ++i) CHECK(plain[i] == g.values(y)[i]);
}

TEST_CASE("forward is pure given parameters and input") {
  std::mt19937_64 rng(23);
  NetworkSpec spec{2, {8}, HeadKind::ScalarValue};
  Mlp net = Mlp::init(spec, rng);
  const std::array<double, 2> input = {1.0, 2.0};
  const auto a = net.forward_plain(input);
  const auto b = net.forward_plain(input);
  CHECK(a == b);
}
