#include "neurolesion/lesion.hpp"

#include <cmath>
#include <cstdlib>

namespace neurolesion {

void LesionSpec::validate_for(const std::vector<int>& layer_sizes) const {
  const int hidden_count = static_cast<int>(layer_sizes.size()) - 2;
  if (hidden_layer < 0 || hidden_layer >= hidden_count)
    throw ConfigError("lesion hidden_layer out of range");
  if (neuron < 0 || neuron >= layer_sizes[static_cast<std::size_t>(hidden_layer) + 1])
    throw ConfigError("lesion neuron index out of range");
}

const char* lesion_mode_tag(LesionMode mode) {
  switch (mode) {
    case LesionMode::ZeroIncoming: return "zero_incoming";
    case LesionMode::ZeroOutgoing: return "zero_outgoing";
    case LesionMode::ZeroBoth: return "zero_both";
  }
  return "unknown";
}

LesionMode parse_lesion_mode(const std::string& tag) {
  if (tag == "zero_incoming") return LesionMode::ZeroIncoming;
  if (tag == "zero_outgoing") return LesionMode::ZeroOutgoing;
  if (tag == "zero_both") return LesionMode::ZeroBoth;
  throw ConfigError("unrecognized lesion mode: " + tag);
}

void inject_lesion(Network& net, const LesionSpec& spec) {
  spec.validate_for(net.layer_sizes);
  const std::size_t in_l = static_cast<std::size_t>(spec.hidden_layer);   // incoming weights
  const std::size_t out_l = in_l + 1;                                     // outgoing weights
  const int k = spec.neuron;
  if (spec.mode == LesionMode::ZeroIncoming || spec.mode == LesionMode::ZeroBoth) {
    Matrix& w = net.weights[in_l];
    for (int j = 0; j < w.cols; ++j) {
      w(k, j) = 0.0;
      if (spec.freeze) net.frozen_weights[in_l].set(k, j, true);
    }
    net.biases[in_l][static_cast<std::size_t>(k)] = 0.0;
    if (spec.freeze) net.frozen_biases[in_l][static_cast<std::size_t>(k)] = 1;
  }
  if (spec.mode == LesionMode::ZeroOutgoing || spec.mode == LesionMode::ZeroBoth) {
    Matrix& w = net.weights[out_l];
    for (int i = 0; i < w.rows; ++i) {
      w(i, k) = 0.0;
      if (spec.freeze) net.frozen_weights[out_l].set(i, k, true);
    }
  }
}

void LesionInjector::fire(Network& net, const LesionSpec& spec) {
  if (fired) throw StateError("lesion already injected");
  inject_lesion(net, spec);
  fired = true;
}

TelemetrySnapshot probe_telemetry(const Network& net, const ProbeBatch& probe, std::uint64_t step,
                                  double vanish_threshold) {
  if (probe.inputs.empty()) throw ConfigError("telemetry probe batch is empty");
  if (probe.inputs.size() != probe.targets.size())
    throw ShapeError("probe inputs and targets differ in count");

  TelemetrySnapshot snap;
  snap.step = step;
  snap.vanish_threshold = vanish_threshold;

  const int nl = net.weight_layer_count();
  Gradient total = zero_gradient_like(net);
  snap.mean_abs_activation.assign(static_cast<std::size_t>(nl), {});
  snap.dead.assign(static_cast<std::size_t>(nl), {});
  for (int l = 0; l < nl; ++l) {
    const std::size_t width = static_cast<std::size_t>(net.layer_sizes[static_cast<std::size_t>(l) + 1]);
    snap.mean_abs_activation[static_cast<std::size_t>(l)].assign(width, 0.0);
    snap.dead[static_cast<std::size_t>(l)].assign(width, 1);
  }

  TrainConfig plain;  // lambda 0, keep 1: telemetry sees the raw data gradient
  double loss_sum = 0.0;
  for (std::size_t s = 0; s < probe.inputs.size(); ++s) {
    ForwardTrace trace = forward(net, probe.inputs[s]);
    loss_sum += total_loss(net, trace, probe.targets[s], plain);
    Gradient g = backward(net, trace, probe.targets[s], plain);
    for (int l = 0; l < nl; ++l) {
      const std::size_t lu = static_cast<std::size_t>(l);
      for (std::size_t i = 0; i < total.weights[lu].data.size(); ++i)
        total.weights[lu].data[i] += g.weights[lu].data[i];
      for (std::size_t i = 0; i < trace.act[lu + 1].size(); ++i) {
        double a = trace.act[lu + 1][i];
        snap.mean_abs_activation[lu][i] += std::abs(a);
        if (a != 0.0) snap.dead[lu][i] = 0;
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(probe.inputs.size());
  snap.loss = loss_sum * inv_n;
  for (int l = 0; l < nl; ++l) {
    const std::size_t lu = static_cast<std::size_t>(l);
    for (auto& m : snap.mean_abs_activation[lu]) m *= inv_n;
    double sq = 0.0;
    for (double v : total.weights[lu].data) {
      double mean = v * inv_n;
      sq += mean * mean;
    }
    double norm = std::sqrt(sq);
    snap.layer_grad_norms.push_back(norm);
    snap.vanishing.push_back(norm < vanish_threshold ? 1 : 0);
  }
  return snap;
}

CompensationReport compensation_report(const Network& at_death, const Network& final_net,
                                       const LesionSpec& spec, bool incoming_view) {
  if (at_death.layer_sizes != final_net.layer_sizes)
    throw ShapeError("compensation requires networks of identical topology");
  return compensation_from_weights(at_death.weights, final_net.weights, at_death.layer_sizes, spec,
                                   incoming_view);
}

CompensationReport compensation_from_weights(const std::vector<Matrix>& at_death,
                                             const std::vector<Matrix>& final_weights,
                                             const std::vector<int>& layer_sizes,
                                             const LesionSpec& spec, bool incoming_view) {
  if (at_death.size() != final_weights.size())
    throw ShapeError("compensation requires weight stacks of identical depth");
  spec.validate_for(layer_sizes);

  CompensationReport report;
  report.hidden_layer = spec.hidden_layer;
  report.dead_neuron = spec.neuron;
  report.incoming_view = incoming_view;

  const std::size_t in_l = static_cast<std::size_t>(spec.hidden_layer);
  const std::size_t out_l = in_l + 1;
  const int width = layer_sizes[in_l + 1];

  for (int k = 0; k < width; ++k) {
    if (k == spec.neuron) continue;
    double delta = 0.0;
    if (incoming_view) {
      const Matrix& before = at_death[in_l];
      const Matrix& after = final_weights[in_l];
      for (int j = 0; j < before.cols; ++j) delta += std::abs(after(k, j) - before(k, j));
    } else {
      const Matrix& before = at_death[out_l];
      const Matrix& after = final_weights[out_l];
      for (int i = 0; i < before.rows; ++i) delta += std::abs(after(i, k) - before(i, k));
    }
    report.survivors.push_back({k, std::abs(k - spec.neuron), delta, std::nullopt});
    report.total_delta += delta;
  }

  if (report.total_delta <= 0.0) {
    report.no_adaptation = true;
    return report;
  }

  int max_distance = 0;
  for (auto& s : report.survivors) {
    s.share = s.delta / report.total_delta;
    max_distance = std::max(max_distance, s.distance);
  }
  report.share_by_distance.assign(static_cast<std::size_t>(max_distance) + 1, 0.0);
  for (const auto& s : report.survivors)
    report.share_by_distance[static_cast<std::size_t>(s.distance)] += *s.share;
  report.s1 = report.share_by_distance.size() > 1 ? report.share_by_distance[1] : 0.0;
  return report;
}

}  // namespace neurolesion
