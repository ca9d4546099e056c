#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "neurolesion/activations.hpp"
#include "neurolesion/lesion.hpp"
#include "neurolesion/matrix.hpp"

namespace neurolesion {

// Time-stepped leaky integrate-and-fire dynamics; dt is one step.
struct LifParams {
  double tau_m = 10.0;
  double v_rest = 0.0;
  double v_reset = 0.0;
  double v_th = 1.0;
  double r = 1.0;
  int refractory = 2;

  void validate() const;
};

struct SReluGate {
  double a = 1.0;
  double b = 1.0;
};

struct SpikeTrain {
  int neuron = 0;
  std::vector<int> steps;  // strictly increasing, within [0, T)
};

// Last few spike steps of one neuron, oldest dropped first.
struct SpikeHistory {
  static constexpr int kCapacity = 64;
  std::array<int, kCapacity> buffer{};
  int count = 0;
  int next = 0;

  void push(int step);
  void clear();
  std::vector<int> recent() const;  // ascending
};

// Layered spiking network. weights[l] maps layer l spikes to layer l+1
// currents. Membrane state is scratch: every simulation window starts from
// rest. The optional gate squashes each neuron's input current through the
// SReLU before integration; spikes themselves stay threshold-driven.
struct SnnNetwork {
  std::vector<int> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<BoolMatrix> frozen;
  std::optional<SReluGate> gate;

  std::vector<double> v;               // per non-input neuron
  std::vector<int> refractory_left;    // per non-input neuron
  std::vector<SpikeHistory> history;   // per non-input neuron

  int layer_count() const { return static_cast<int>(layer_sizes.size()); }
  int weight_layer_count() const { return layer_count() - 1; }
  int non_input_count() const;
  // Offset of layer (>= 1) into the non-input state arrays.
  int state_offset(int layer) const;
  // Global neuron id: inputs come first, then layer by layer.
  int global_id(int layer, int unit) const;
};

// Weights uniform in [-gain/sqrt(fan_in), +gain/sqrt(fan_in)] (mixed-sign).
SnnNetwork init_snn_network(const std::vector<int>& layer_sizes, std::uint64_t seed,
                            double init_gain = 1.0);

// Each input neuron fires independently per step with probability
// x_i * max_rate / T (clamped to 1).
std::vector<SpikeTrain> encode_poisson(const Vector& x, double max_rate, int T,
                                       std::uint64_t seed);

struct SimResult {
  std::vector<SpikeTrain> trains;              // all neurons, global ids
  std::vector<std::vector<double>> membrane;   // [non-input neuron][step], end-of-step value
  int T = 0;

  const SpikeTrain& output_train(const SnnNetwork& net) const;
};

// Clock-driven simulation: within a step, layers update in order, so a spike
// cascades through the whole depth in one step. Refractory neurons integrate
// nothing. Divergent membrane values raise NumericError with the step index.
SimResult lif_simulate(SnnNetwork& net, const std::vector<SpikeTrain>& input_trains, int T,
                       const LifParams& lif);

struct SurRule {
  double eta = 0.005;
  int window = 5;
};

struct StdpRule {
  double a_plus = 0.01;
  double a_minus = 0.012;
  double tau_plus = 20.0;
  double tau_minus = 20.0;
};

struct PlasticityRule {
  enum class Tag { Sur, Stdp };
  Tag tag = Tag::Sur;
  SurRule sur;
  StdpRule stdp;

  static PlasticityRule make_sur(const SurRule& rule);
  static PlasticityRule make_stdp(const StdpRule& rule);
  void validate() const;
};

// Rectangular pairing window: every (pre, post) spike pair with
// 0 < t_post - t_pre <= window adds +eta, every pair with
// 0 < t_pre - t_post <= window adds -eta; updates are summed over the window
// and the result clamped to [w_min, w_max]. Frozen synapses keep their value.
Matrix sur_update(const Matrix& weights, const std::vector<SpikeTrain>& pre_trains,
                  const std::vector<SpikeTrain>& post_trains, const PlasticityRule& rule,
                  double w_min, double w_max, const BoolMatrix* frozen = nullptr);

// Exponential pairing: dw = a_plus * exp(-dt/tau_plus) for dt > 0,
// -a_minus * exp(dt/tau_minus) for dt < 0, with dt = t_post - t_pre.
Matrix stdp_update(const Matrix& weights, const std::vector<SpikeTrain>& pre_trains,
                   const std::vector<SpikeTrain>& post_trains, const PlasticityRule& rule,
                   double w_min, double w_max, const BoolMatrix* frozen = nullptr);

double rate_decode(const SpikeTrain& train, int T, double scale);

struct SurrogateParams {
  double beta = 4.0;
  double decode_scale = 1.0;
};

// Continuous stand-in used on the backward path: downstream of the chosen
// weight layer every neuron emits sigma(beta * (v - v_th)) instead of a hard
// spike, with no reset or refractory period, driven by the recorded binary
// spikes of the layer feeding that weight matrix. Returns the relaxed
// rate-decoded output.
double relaxed_suffix_rate(const SnnNetwork& net, int weight_layer,
                           const std::vector<std::vector<std::uint8_t>>& pre_spikes, int T,
                           const LifParams& lif, const SurrogateParams& params);

// Exact gradient of the rate-coded MSE of the relaxed model above, one
// matrix per weight layer; each layer's gradient uses the true spiking
// activity right up to its own inputs.
std::vector<Matrix> surrogate_gradient(SnnNetwork& net,
                                       const std::vector<SpikeTrain>& input_trains, double y_true,
                                       int T, const LifParams& lif, const SurrogateParams& params);

// SGD on the surrogate gradient; the observable forward stays spiking.
void surrogate_backprop_step(SnnNetwork& net, const std::vector<SpikeTrain>& input_trains,
                             double y_true, double lr, int T, const LifParams& lif,
                             const SurrogateParams& params);

// Same lesion semantics as the dense network, minus biases.
void inject_snn_lesion(SnnNetwork& net, const LesionSpec& spec);

struct SnnLesionInjector {
  bool fired = false;
  void fire(SnnNetwork& net, const LesionSpec& spec);
};

// Dense [step][unit] view of one layer's trains.
std::vector<std::vector<std::uint8_t>> dense_spikes(const std::vector<SpikeTrain>& trains, int T);

// CSV rows neuron_id,step.
std::string raster_to_csv(const std::vector<SpikeTrain>& trains);

}  // namespace neurolesion
