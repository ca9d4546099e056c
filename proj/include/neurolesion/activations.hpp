#pragma once

#include <string>

#include "neurolesion/errors.hpp"

namespace neurolesion {

enum class Activation { Sigmoid, ReLU, LeakyReLU, SReLU, Identity };

// A per-layer activation choice plus its parameters. SReLU is the piecewise
// map x for x > b, 0 for x < -a, (x+a)(b-x)/(b+a) in between; it is
// intentionally discontinuous at x = b (the middle branch tends to 0 while
// the upper branch starts at b).
struct ActivationKind {
  Activation tag = Activation::Sigmoid;
  double slope = 0.01;  // LeakyReLU
  double a = 1.0;       // SReLU lower knee
  double b = 1.0;       // SReLU upper knee

  static ActivationKind sigmoid() { return {Activation::Sigmoid}; }
  static ActivationKind relu() { return {Activation::ReLU}; }
  static ActivationKind leaky_relu(double slope = 0.01) {
    ActivationKind k{Activation::LeakyReLU};
    k.slope = slope;
    k.validate();
    return k;
  }
  static ActivationKind srelu(double a = 1.0, double b = 1.0) {
    ActivationKind k{Activation::SReLU};
    k.a = a;
    k.b = b;
    k.validate();
    return k;
  }
  static ActivationKind identity() { return {Activation::Identity}; }

  // Throws ConfigError when parameters are out of range.
  void validate() const;

  bool operator==(const ActivationKind& other) const = default;
};

double activate(const ActivationKind& kind, double x);
double derivative(const ActivationKind& kind, double x);

// Lowercase tag used in configs and reports, e.g. "leakyrelu:0.01",
// "srelu:1:1".
std::string activation_tag(const ActivationKind& kind);
ActivationKind parse_activation_tag(const std::string& tag);

}  // namespace neurolesion
