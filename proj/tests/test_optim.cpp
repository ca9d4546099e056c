#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "neurolesion/optim.hpp"

using namespace neurolesion;

namespace {

// 1-parameter network: one weight, one bias.
Network scalar_net(double w) {
  Network net = init_network({1, 1}, {ActivationKind::identity()}, 0);
  net.weights[0](0, 0) = w;
  net.biases[0][0] = 0.0;
  return net;
}

Gradient scalar_grad(const Network& net, double gw, double gb = 0.0) {
  Gradient g = zero_gradient_like(net);
  g.weights[0](0, 0) = gw;
  g.biases[0][0] = gb;
  return g;
}

}  // namespace

TEST_CASE("sgd step") {
  Network net = scalar_net(1.0);
  sgd_step(net, scalar_grad(net, 0.5), SgdState{0.1});
  CHECK(net.weights[0](0, 0) == doctest::Approx(0.95));

  Network fixed = scalar_net(1.0);
  sgd_step(fixed, scalar_grad(fixed, 0.0), SgdState{0.1});
  CHECK(fixed.weights[0](0, 0) == 1.0);

  Network frozen = scalar_net(1.0);
  frozen.frozen_weights[0].set(0, 0, true);
  sgd_step(frozen, scalar_grad(frozen, 10.0), SgdState{0.1});
  CHECK(frozen.weights[0](0, 0) == 1.0);

  CHECK_THROWS_AS(sgd_step(net, scalar_grad(net, 0.0), SgdState{0.0}), ConfigError);
}

TEST_CASE("adam first step matches the closed form") {
  Network net = scalar_net(0.0);
  AdamState state = AdamState::init_for(net);  // alpha 0.001, betas 0.9/0.999, eps 1e-8
  adam_step(net, scalar_grad(net, 1.0), state);
  CHECK(state.t == 1);
  CHECK(std::abs(state.m_weights[0](0, 0) - 0.1) <= 1e-12);
  CHECK(std::abs(state.v_weights[0](0, 0) - 0.001) <= 1e-12);
  auto [m_hat, v_hat] = adam_bias_correction(0.1, 0.001, 1, 0.9, 0.999);
  CHECK(std::abs(m_hat - 1.0) <= 1e-12);
  CHECK(std::abs(v_hat - 1.0) <= 1e-12);
  // w = -alpha * m_hat / (sqrt(v_hat) + eps)
  CHECK(net.weights[0](0, 0) == doctest::Approx(-0.001 / (1.0 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam bias correction edge cases") {
  CHECK_THROWS_AS(adam_bias_correction(0.1, 0.1, 0, 0.9, 0.999), DomainError);
  auto [m_hat, v_hat] = adam_bias_correction(0.25, 0.5, 5000, 0.9, 0.999);
  CHECK(m_hat == doctest::Approx(0.25));
  CHECK(v_hat == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("zero gradient is a fixed point of adam") {
  Network net = scalar_net(0.7);
  AdamState state = AdamState::init_for(net);
  for (int i = 0; i < 50; ++i) adam_step(net, scalar_grad(net, 0.0), state);
  CHECK(net.weights[0](0, 0) == 0.7);
  CHECK(state.m_weights[0](0, 0) == 0.0);
  CHECK(state.v_weights[0](0, 0) == 0.0);
}

TEST_CASE("identical states follow identical trajectories") {
  Network a = scalar_net(0.3), b = scalar_net(0.3);
  AdamState sa = AdamState::init_for(a), sb = AdamState::init_for(b);
  SplitMix64 rng(12);
  for (int i = 0; i < 200; ++i) {
    double g = rng.next_uniform(-2, 2);
    adam_step(a, scalar_grad(a, g), sa);
    adam_step(b, scalar_grad(b, g), sb);
    CHECK(a.weights[0](0, 0) == b.weights[0](0, 0));
  }
}

TEST_CASE("beta1=beta2=0 reduces adam to sign-sgd-like updates") {
  AdamParams p;
  p.beta1 = 0.0;
  p.beta2 = 0.0;
  SplitMix64 rng(77);
  for (int i = 0; i < 100; ++i) {
    double w0 = rng.next_uniform(-1, 1);
    double g = rng.next_uniform(-3, 3);
    if (std::abs(g) < 1e-12) continue;
    Network net = scalar_net(w0);
    AdamState state = AdamState::init_for(net, p);
    adam_step(net, scalar_grad(net, g), state);
    double expected = w0 - p.alpha * g / (std::abs(g) + p.epsilon);
    CHECK(net.weights[0](0, 0) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("update magnitude is bounded and approaches alpha under constant gradient") {
  AdamParams p;
  Network net = scalar_net(0.0);
  AdamState state = AdamState::init_for(net, p);
  double prev = 0.0;
  double last_delta = 0.0;
  for (int i = 0; i < 5000; ++i) {
    adam_step(net, scalar_grad(net, 2.5), state);
    double cur = net.weights[0](0, 0);
    last_delta = std::abs(cur - prev);
    auto [m_hat, v_hat] =
        adam_bias_correction(state.m_weights[0](0, 0), state.v_weights[0](0, 0), state.t, p.beta1, p.beta2);
    CHECK(state.v_weights[0](0, 0) >= 0.0);
    CHECK(last_delta <= p.alpha * std::abs(m_hat) / (std::sqrt(v_hat) + p.epsilon) + 1e-15);
    prev = cur;
  }
  // SNR 1: |dw| -> alpha
  CHECK(last_delta == doctest::Approx(p.alpha).epsilon(1e-3));
}

TEST_CASE("adam converges on the 1-d quadratic") {
  // loss 1/2 (w-3)^2 from w=0, alpha 0.01: direct simulation oracle
  AdamParams p;
  p.alpha = 0.01;
  Network net = scalar_net(0.0);
  AdamState state = AdamState::init_for(net, p);
  int steps = 0;
  while (steps < 20000) {
    double w = net.weights[0](0, 0);
    adam_step(net, scalar_grad(net, w - 3.0), state);
    ++steps;
    if (std::abs(net.weights[0](0, 0) - 3.0) < 1e-3) break;
  }
  CHECK(std::abs(net.weights[0](0, 0) - 3.0) < 1e-3);
  CHECK(steps <= 20000);
}

TEST_CASE("parameter validation") {
  AdamParams bad;
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.beta2 = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("optimizer tags") {
  CHECK(optimizer_tag(SgdState{0.05}) == "sgd:lr=0.05");
  CHECK(optimizer_tag(AdamParams{}) == "adam:alpha=0.001,beta1=0.9,beta2=0.999,eps=1e-08");
}

TEST_CASE("shape mismatch is rejected") {
  Network net = scalar_net(0.0);
  Network wide = init_network({2, 2}, {ActivationKind::identity()}, 1);
  Gradient g = zero_gradient_like(wide);
  CHECK_THROWS_AS(sgd_step(net, g, SgdState{0.1}), ShapeError);
  AdamState state = AdamState::init_for(net);
  CHECK_THROWS_AS(adam_step(net, g, state), ShapeError);
}
