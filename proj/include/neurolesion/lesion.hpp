#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "neurolesion/network.hpp"

namespace neurolesion {

enum class LesionMode { ZeroIncoming, ZeroOutgoing, ZeroBoth };

// Which neuron dies, when, and how. hidden_layer counts hidden layers only
// (0 = first hidden layer); input and output layers cannot be lesioned.
struct LesionSpec {
  int hidden_layer = 1;
  int neuron = 4;
  LesionMode mode = LesionMode::ZeroIncoming;
  std::uint64_t death_step = 0;
  bool freeze = true;

  void validate_for(const std::vector<int>& layer_sizes) const;
};

const char* lesion_mode_tag(LesionMode mode);
LesionMode parse_lesion_mode(const std::string& tag);

// ZeroIncoming wipes the neuron's incoming weight row and bias, ZeroOutgoing
// its column in the next weight matrix, ZeroBoth does both. With freeze the
// zeroed positions are added to the frozen mask.
void inject_lesion(Network& net, const LesionSpec& spec);

// Once-only wrapper used by training loops; a second fire is a StateError.
struct LesionInjector {
  bool fired = false;
  void fire(Network& net, const LesionSpec& spec);
};

struct ProbeBatch {
  std::vector<Vector> inputs;
  std::vector<Vector> targets;
};

struct TelemetrySnapshot {
  std::uint64_t step = 0;
  double loss = 0.0;
  double vanish_threshold = 1e-7;
  std::vector<double> layer_grad_norms;                 // weights-only L2, per weight layer
  std::vector<std::uint8_t> vanishing;                  // norm < threshold
  std::vector<std::vector<double>> mean_abs_activation; // per non-input layer
  std::vector<std::vector<std::uint8_t>> dead;          // activation exactly 0 on every probe
};

// Pure observation: gradients of plain MSE against the probe targets,
// activation statistics, and dead flags. Never mutates the network.
TelemetrySnapshot probe_telemetry(const Network& net, const ProbeBatch& probe, std::uint64_t step,
                                  double vanish_threshold = 1e-7);

struct SurvivorShare {
  int index = 0;
  int distance = 0;
  double delta = 0.0;
  std::optional<double> share;
};

// How the surviving neurons of the lesioned layer divided up the total
// post-death weight change. share_by_distance[d] aggregates survivors at
// intra-layer index distance d from the dead neuron; s1 is the
// nearest-neighbor share (d = 1).
struct CompensationReport {
  int hidden_layer = 0;
  int dead_neuron = 0;
  bool incoming_view = false;
  bool no_adaptation = false;
  double total_delta = 0.0;
  std::vector<SurvivorShare> survivors;
  std::vector<double> share_by_distance;
  std::optional<double> s1;
};

// Outgoing view (default) measures each survivor's column in the next weight
// matrix; the incoming view measures its row in its own weight matrix.
CompensationReport compensation_report(const Network& at_death, const Network& final_net,
                                       const LesionSpec& spec, bool incoming_view = false);

// Weight-matrix form shared by the dense and the spiking network.
CompensationReport compensation_from_weights(const std::vector<Matrix>& at_death,
                                             const std::vector<Matrix>& final_weights,
                                             const std::vector<int>& layer_sizes,
                                             const LesionSpec& spec, bool incoming_view = false);

}  // namespace neurolesion
