#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neurolesion/activations.hpp"
#include "neurolesion/matrix.hpp"
#include "neurolesion/rng.hpp"

namespace neurolesion {

struct TrainConfig {
  double l2_lambda = 0.0;
  double dropout_keep = 1.0;  // (0, 1]; 1 disables dropout
  int epochs = 30;
  std::uint64_t seed = 0;

  void validate() const;
};

// Dense feedforward net. weights[l] maps layer l to layer l+1 and has shape
// layer_sizes[l+1] x layer_sizes[l]; activations[l] fires layer l+1.
// frozen positions are excluded from every optimizer update.
struct Network {
  std::vector<int> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  std::vector<ActivationKind> activations;
  std::vector<BoolMatrix> frozen_weights;
  std::vector<std::vector<std::uint8_t>> frozen_biases;

  int layer_count() const { return static_cast<int>(layer_sizes.size()); }
  int weight_layer_count() const { return layer_count() - 1; }
  int param_count() const;

  bool operator==(const Network& other) const = default;
};

// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)] from a per-layer
// SplitMix64 substream; biases zero; nothing frozen.
Network init_network(const std::vector<int>& layer_sizes,
                     const std::vector<ActivationKind>& activations, std::uint64_t seed);

struct ForwardTrace {
  std::vector<Vector> pre;            // z per non-input layer
  std::vector<Vector> act;            // a per layer, act[0] = input
  std::vector<Vector> dropout_scale;  // per non-input layer, empty when dropout off
  double y_pred = 0.0;                // act.back()[0]
};

// Inference-mode forward pass (no dropout).
ForwardTrace forward(const Network& net, const Vector& x);

// Training-mode forward pass: inverted dropout on hidden layers when
// dropout_keep < 1. The mask is a pure function of (config seed, step).
ForwardTrace forward_train(const Network& net, const Vector& x, const TrainConfig& config,
                           std::uint64_t step);

// Multiplier vector (0 or 1/keep per unit); keep = 1 yields all ones.
Vector make_dropout_mask(int size, double keep, std::uint64_t seed, std::uint64_t step,
                         int hidden_layer);

// L = 1/2 (y_true - y_pred)^2, halved-square convention throughout.
double mse_loss(double y_true, double y_pred);

struct Gradient {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

Gradient zero_gradient_like(const Network& net);

// Exact reverse-mode gradient of the data loss plus l2_lambda * sum(w^2);
// entries at frozen positions are forced to zero.
Gradient backward(const Network& net, const ForwardTrace& trace, const Vector& y_true,
                  const TrainConfig& config);
Gradient backward(const Network& net, const ForwardTrace& trace, double y_true,
                  const TrainConfig& config);

// Data term plus L2 penalty for the given trace; the quantity backward
// differentiates.
double total_loss(const Network& net, const ForwardTrace& trace, const Vector& y_true,
                  const TrainConfig& config);

// Versioned JSON checkpoint (bitwise round-trip).
std::string network_to_json(const Network& net);
Network network_from_json(const std::string& text);
std::uint64_t checkpoint_hash(const Network& net);

}  // namespace neurolesion
