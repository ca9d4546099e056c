#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "neurolesion/lesion.hpp"
#include "neurolesion/optim.hpp"

using namespace neurolesion;

namespace {

std::vector<ActivationKind> uniform_acts(std::size_t layers, ActivationKind kind) {
  std::vector<ActivationKind> acts(layers - 1, kind);
  acts.back() = ActivationKind::identity();
  return acts;
}

ProbeBatch random_probe(int n, int width, std::uint64_t seed) {
  ProbeBatch probe;
  SplitMix64 rng(seed);
  for (int i = 0; i < n; ++i) {
    Vector x(static_cast<std::size_t>(width));
    for (auto& v : x) v = rng.next_uniform(-2, 2);
    probe.inputs.push_back(std::move(x));
    probe.targets.push_back(Vector{rng.next_uniform(-1, 1)});
  }
  return probe;
}

// Recompute y_pred from a forward trace with one hidden activation replaced
// by a counterfactual value.
double replay_with_activation(const Network& net, const ForwardTrace& trace, int hidden_layer,
                              int unit, double value) {
  Vector a = trace.act[static_cast<std::size_t>(hidden_layer) + 1];
  a[static_cast<std::size_t>(unit)] = value;
  for (int l = hidden_layer + 1; l < net.weight_layer_count(); ++l) {
    Vector z = matvec(net.weights[static_cast<std::size_t>(l)], a);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += net.biases[static_cast<std::size_t>(l)][i];
    a.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
      a[i] = activate(net.activations[static_cast<std::size_t>(l)], z[i]);
  }
  return a.front();
}

}  // namespace

TEST_CASE("zero-incoming relu neuron is silent for every input") {
  Network net = init_network({5, 10, 10, 10, 1}, uniform_acts(5, ActivationKind::relu()), 4);
  LesionSpec spec;
  spec.hidden_layer = 1;
  spec.neuron = 4;
  spec.mode = LesionMode::ZeroIncoming;
  inject_lesion(net, spec);
  SplitMix64 rng(8);
  for (int i = 0; i < 200; ++i) {
    Vector x(5);
    for (auto& v : x) v = rng.next_uniform(-5, 5);
    ForwardTrace t = forward(net, x);
    CHECK(t.act[2][4] == 0.0);
  }
}

TEST_CASE("zero-incoming sigmoid neuron is pinned at one half") {
  Network net = init_network({5, 10, 10, 10, 1}, uniform_acts(5, ActivationKind::sigmoid()), 4);
  LesionSpec spec;
  spec.hidden_layer = 0;
  spec.neuron = 2;
  inject_lesion(net, spec);
  SplitMix64 rng(8);
  for (int i = 0; i < 100; ++i) {
    Vector x(5);
    for (auto& v : x) v = rng.next_uniform(-5, 5);
    CHECK(forward(net, x).act[1][2] == doctest::Approx(0.5));
  }
}

TEST_CASE("zero-both removes the neuron from the prediction entirely") {
  Network net = init_network({5, 10, 10, 10, 1}, uniform_acts(5, ActivationKind::sigmoid()), 12);
  LesionSpec spec;
  spec.hidden_layer = 1;
  spec.neuron = 7;
  spec.mode = LesionMode::ZeroBoth;
  inject_lesion(net, spec);
  SplitMix64 rng(9);
  for (int i = 0; i < 50; ++i) {
    Vector x(5);
    for (auto& v : x) v = rng.next_uniform(-3, 3);
    ForwardTrace t = forward(net, x);
    double counterfactual = rng.next_uniform(-10, 10);
    CHECK(replay_with_activation(net, t, 1, 7, counterfactual) == t.y_pred);
  }
}

TEST_CASE("lesioned relu neuron receives no gradient after freeze") {
  Network net = init_network({5, 10, 10, 10, 1}, uniform_acts(5, ActivationKind::relu()), 21);
  LesionSpec spec;
  spec.hidden_layer = 1;
  spec.neuron = 3;
  inject_lesion(net, spec);  // freeze defaults to true
  TrainConfig cfg;
  SplitMix64 rng(22);
  for (int i = 0; i < 100; ++i) {
    Vector x(5);
    for (auto& v : x) v = rng.next_uniform(-2, 2);
    ForwardTrace t = forward(net, x);
    CHECK(t.act[2][3] == 0.0);
    Gradient g = backward(net, t, rng.next_uniform(-1, 1), cfg);
    for (int j = 0; j < 10; ++j) CHECK(g.weights[1](3, j) == 0.0);
    CHECK(g.biases[1][3] == 0.0);
  }
}

TEST_CASE("lesion errors") {
  Network net = init_network({5, 10, 10, 10, 1}, uniform_acts(5, ActivationKind::relu()), 1);
  LesionSpec bad;
  bad.hidden_layer = 3;  // only 3 hidden layers: 0..2
  CHECK_THROWS_AS(inject_lesion(net, bad), ConfigError);
  bad.hidden_layer = 0;
  bad.neuron = 10;
  CHECK_THROWS_AS(inject_lesion(net, bad), ConfigError);

  LesionSpec spec;
  LesionInjector injector;
  injector.fire(net, spec);
  CHECK_THROWS_AS(injector.fire(net, spec), StateError);
}

TEST_CASE("telemetry flags an all-zero relu neuron as dead") {
  Network net = init_network({5, 10, 10, 10, 1}, uniform_acts(5, ActivationKind::relu()), 30);
  LesionSpec spec;
  spec.hidden_layer = 1;
  spec.neuron = 6;
  inject_lesion(net, spec);
  auto snap = probe_telemetry(net, random_probe(16, 5, 31), 7);
  CHECK(snap.step == 7);
  CHECK(snap.dead[1][6] == 1);
  CHECK(snap.mean_abs_activation[1][6] == 0.0);
}

TEST_CASE("fresh seed-42 network has no dead hidden relu units") {
  Network net = init_network({5, 10, 10, 10, 1}, uniform_acts(5, ActivationKind::relu()), 42);
  auto snap = probe_telemetry(net, random_probe(64, 5, 43), 0);
  for (int l = 0; l < 3; ++l)
    for (auto flag : snap.dead[static_cast<std::size_t>(l)]) CHECK(flag == 0);
}

TEST_CASE("identity single-layer gradient norm matches |err| * |x|") {
  Network net = init_network({3, 1}, {ActivationKind::identity()}, 5);
  ProbeBatch probe;
  probe.inputs.push_back(Vector{1.0, 2.0, 2.0});  // norm 3
  probe.targets.push_back(Vector{0.0});
  auto snap = probe_telemetry(net, probe, 0);
  double y = forward(net, probe.inputs[0]).y_pred;
  CHECK(snap.layer_grad_norms[0] == doctest::Approx(std::abs(y) * 3.0));
}

TEST_CASE("telemetry never mutates the network") {
  Network net = init_network({5, 10, 10, 10, 1}, uniform_acts(5, ActivationKind::sigmoid()), 60);
  Network before = net;
  probe_telemetry(net, random_probe(8, 5, 61), 0);
  CHECK(net == before);
  CHECK_THROWS_AS(probe_telemetry(net, ProbeBatch{}, 0), ConfigError);
}

TEST_CASE("compensation shares") {
  // three survivors with deltas 0.6 / 0.3 / 0.1
  Network base = init_network({2, 4, 1}, uniform_acts(3, ActivationKind::sigmoid()), 70);
  Network final_net = base;
  LesionSpec spec;
  spec.hidden_layer = 0;
  spec.neuron = 0;
  // survivors are units 1..3; outgoing weights live in weights[1] column k
  final_net.weights[1](0, 1) = base.weights[1](0, 1) + 0.6;
  final_net.weights[1](0, 2) = base.weights[1](0, 2) - 0.3;
  final_net.weights[1](0, 3) = base.weights[1](0, 3) + 0.1;
  auto report = compensation_report(base, final_net, spec);
  REQUIRE(report.survivors.size() == 3);
  CHECK(*report.survivors[0].share == doctest::Approx(0.6));
  CHECK(*report.survivors[1].share == doctest::Approx(0.3));
  CHECK(*report.survivors[2].share == doctest::Approx(0.1));
  double sum = 0.0;
  for (const auto& s : report.survivors) sum += *s.share;
  CHECK(std::abs(sum - 1.0) <= 1e-9);
  CHECK(!report.no_adaptation);
}

TEST_CASE("distance-1 neighbors of unit 4 in a 10-unit layer are 3 and 5") {
  Network base = init_network({5, 10, 10, 10, 1}, uniform_acts(5, ActivationKind::sigmoid()), 71);
  Network final_net = base;
  LesionSpec spec;
  spec.hidden_layer = 1;
  spec.neuron = 4;
  SplitMix64 rng(72);
  for (int i = 0; i < final_net.weights[2].rows; ++i)
    for (int j = 0; j < final_net.weights[2].cols; ++j)
      final_net.weights[2](i, j) += rng.next_uniform(-0.5, 0.5);
  auto report = compensation_report(base, final_net, spec);
  std::vector<int> d1;
  for (const auto& s : report.survivors)
    if (s.distance == 1) d1.push_back(s.index);
  CHECK(d1 == std::vector<int>{3, 5});
  // brute-force distance aggregation
  std::vector<double> by_distance(10, 0.0);
  for (const auto& s : report.survivors) by_distance[static_cast<std::size_t>(s.distance)] += *s.share;
  for (std::size_t d = 0; d < report.share_by_distance.size(); ++d)
    CHECK(report.share_by_distance[d] == doctest::Approx(by_distance[d]));
  CHECK(*report.s1 == doctest::Approx(by_distance[1]));
}

TEST_CASE("no adaptation when nothing changed") {
  Network base = init_network({2, 4, 1}, uniform_acts(3, ActivationKind::sigmoid()), 73);
  LesionSpec spec;
  spec.hidden_layer = 0;
  spec.neuron = 1;
  auto report = compensation_report(base, base, spec);
  CHECK(report.no_adaptation);
  CHECK(!report.s1.has_value());
  for (const auto& s : report.survivors) CHECK(!s.share.has_value());
}

TEST_CASE("share invariants hold for random weight drifts") {
  SplitMix64 rng(80);
  for (int trial = 0; trial < 30; ++trial) {
    Network base = init_network({5, 10, 10, 10, 1}, uniform_acts(5, ActivationKind::sigmoid()),
                                1000 + static_cast<std::uint64_t>(trial));
    Network final_net = base;
    for (auto& w : final_net.weights)
      for (auto& v : w.data) v += rng.next_uniform(-0.2, 0.2);
    LesionSpec spec;
    spec.hidden_layer = static_cast<int>(rng.next_below(3));
    spec.neuron = static_cast<int>(rng.next_below(10));
    for (bool incoming : {false, true}) {
      auto report = compensation_report(base, final_net, spec, incoming);
      double sum = 0.0;
      for (const auto& s : report.survivors) {
        REQUIRE(s.share.has_value());
        CHECK(*s.share >= 0.0);
        CHECK(*s.share <= 1.0);
        sum += *s.share;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
      CHECK(*report.s1 >= 0.0);
      CHECK(*report.s1 <= 1.0);
    }
  }
}
