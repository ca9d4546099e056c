#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "neurolesion/network.hpp"

namespace neurolesion {

struct SgdState {
  double learning_rate = 0.05;

  void validate() const;
};

struct AdamParams {
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// Per-parameter first and second moments mirroring the network's shapes,
// plus the shared step counter t (incremented before each update).
struct AdamState {
  AdamParams params;
  std::uint64_t t = 0;
  std::vector<Matrix> m_weights, v_weights;
  std::vector<Vector> m_biases, v_biases;

  static AdamState init_for(const Network& net, AdamParams params = {});
};

// w <- w - lr * g; frozen positions untouched.
void sgd_step(Network& net, const Gradient& grad, const SgdState& state);

// m_hat = m / (1 - beta1^t), v_hat = v / (1 - beta2^t); t >= 1.
std::pair<double, double> adam_bias_correction(double m, double v, std::uint64_t t, double beta1,
                                               double beta2);

// One Adam update. Gradients at frozen positions are zeroed before entering
// the moment averages, so a lesioned parameter's m and v stay at rest.
void adam_step(Network& net, const Gradient& grad, AdamState& state);

// Config-string forms: "sgd:lr=0.05" and
// "adam:alpha=0.001,beta1=0.9,beta2=0.999,eps=1e-08".
std::string optimizer_tag(const SgdState& state);
std::string optimizer_tag(const AdamParams& params);

}  // namespace neurolesion
