#include "neurolesion/snn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neurolesion/rng.hpp"

namespace neurolesion {

void LifParams::validate() const {
  if (!(tau_m > 0.0)) throw ConfigError("lif tau_m must be > 0");
  if (!(v_th > v_reset)) throw ConfigError("lif requires v_th > v_reset");
  if (refractory < 0) throw ConfigError("lif refractory must be >= 0");
}

void SpikeHistory::push(int step) {
  buffer[static_cast<std::size_t>(next)] = step;
  next = (next + 1) % kCapacity;
  if (count < kCapacity) ++count;
}

void SpikeHistory::clear() {
  count = 0;
  next = 0;
}

std::vector<int> SpikeHistory::recent() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count));
  int start = (next - count + kCapacity) % kCapacity;
  for (int i = 0; i < count; ++i) out.push_back(buffer[static_cast<std::size_t>((start + i) % kCapacity)]);
  return out;
}

int SnnNetwork::non_input_count() const {
  int n = 0;
  for (std::size_t l = 1; l < layer_sizes.size(); ++l) n += layer_sizes[l];
  return n;
}

int SnnNetwork::state_offset(int layer) const {
  int off = 0;
  for (int l = 1; l < layer; ++l) off += layer_sizes[static_cast<std::size_t>(l)];
  return off;
}

int SnnNetwork::global_id(int layer, int unit) const {
  int off = 0;
  for (int l = 0; l < layer; ++l) off += layer_sizes[static_cast<std::size_t>(l)];
  return off + unit;
}

SnnNetwork init_snn_network(const std::vector<int>& layer_sizes, std::uint64_t seed,
                            double init_gain) {
  if (layer_sizes.size() < 2) throw ConfigError("snn needs at least 2 layers");
  for (int s : layer_sizes)
    if (s < 1) throw ConfigError("every snn layer needs at least 1 unit");
  SnnNetwork net;
  net.layer_sizes = layer_sizes;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    int fan_in = layer_sizes[l];
    int fan_out = layer_sizes[l + 1];
    double bound = init_gain / std::sqrt(static_cast<double>(fan_in));
    SplitMix64 rng(derive_seed(seed, Stream::kSnnInit, l));
    Matrix w(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j) w(i, j) = rng.next_uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.frozen.emplace_back(fan_out, fan_in, false);
  }
  const int n = net.non_input_count();
  net.v.assign(static_cast<std::size_t>(n), 0.0);
  net.refractory_left.assign(static_cast<std::size_t>(n), 0);
  net.history.assign(static_cast<std::size_t>(n), {});
  return net;
}

std::vector<SpikeTrain> encode_poisson(const Vector& x, double max_rate, int T,
                                       std::uint64_t seed) {
  if (T < 1) throw ConfigError("encoding window T must be >= 1");
  if (!(max_rate >= 0.0)) throw ConfigError("max_rate must be >= 0");
  for (double xi : x)
    if (!(xi >= 0.0 && xi <= 1.0)) throw DomainError("poisson input must lie in [0,1]");

  std::vector<SpikeTrain> trains(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    trains[i].neuron = static_cast<int>(i);
    double p = std::min(1.0, x[i] * max_rate / static_cast<double>(T));
    SplitMix64 rng(derive_seed(seed, Stream::kPoisson, i));
    for (int t = 0; t < T; ++t)
      if (rng.next_double() < p) trains[i].steps.push_back(t);
  }
  return trains;
}

const SpikeTrain& SimResult::output_train(const SnnNetwork& net) const {
  return trains[static_cast<std::size_t>(net.global_id(net.layer_count() - 1, 0))];
}

SimResult lif_simulate(SnnNetwork& net, const std::vector<SpikeTrain>& input_trains, int T,
                       const LifParams& lif) {
  lif.validate();
  if (T < 1) throw ConfigError("simulation window T must be >= 1");
  if (static_cast<int>(input_trains.size()) != net.layer_sizes.front())
    throw ShapeError("input trains do not match the input layer width");

  const int n_state = net.non_input_count();
  net.v.assign(static_cast<std::size_t>(n_state), lif.v_rest);
  net.refractory_left.assign(static_cast<std::size_t>(n_state), 0);
  net.history.assign(static_cast<std::size_t>(n_state), {});

  SimResult result;
  result.T = T;
  int total_neurons = 0;
  for (int s : net.layer_sizes) total_neurons += s;
  result.trains.resize(static_cast<std::size_t>(total_neurons));
  for (int i = 0; i < total_neurons; ++i) result.trains[static_cast<std::size_t>(i)].neuron = i;
  for (std::size_t i = 0; i < input_trains.size(); ++i)
    result.trains[i].steps = input_trains[i].steps;
  result.membrane.assign(static_cast<std::size_t>(n_state),
                         std::vector<double>(static_cast<std::size_t>(T), lif.v_rest));

  auto input_dense = dense_spikes(input_trains, T);
  const ActivationKind gate_kind =
      net.gate ? ActivationKind::srelu(net.gate->a, net.gate->b) : ActivationKind::identity();

  std::vector<std::uint8_t> prev, cur;
  for (int t = 0; t < T; ++t) {
    prev = input_dense[static_cast<std::size_t>(t)];
    for (int layer = 1; layer < net.layer_count(); ++layer) {
      const Matrix& w = net.weights[static_cast<std::size_t>(layer - 1)];
      const int width = net.layer_sizes[static_cast<std::size_t>(layer)];
      const int off = net.state_offset(layer);
      cur.assign(static_cast<std::size_t>(width), 0);
      for (int u = 0; u < width; ++u) {
        const std::size_t idx = static_cast<std::size_t>(off + u);
        if (net.refractory_left[idx] > 0) {
          --net.refractory_left[idx];
          result.membrane[idx][static_cast<std::size_t>(t)] = net.v[idx];
          continue;
        }
        double current = 0.0;
        for (int j = 0; j < w.cols; ++j)
          if (prev[static_cast<std::size_t>(j)]) current += w(u, j);
        if (net.gate) current = activate(gate_kind, current);
        double& v = net.v[idx];
        v += (1.0 / lif.tau_m) * (-(v - lif.v_rest) + lif.r * current);
        if (!std::isfinite(v))
          throw NumericError("membrane potential diverged at step " + std::to_string(t));
        if (v >= lif.v_th) {
          cur[static_cast<std::size_t>(u)] = 1;
          result.trains[static_cast<std::size_t>(net.global_id(layer, u))].steps.push_back(t);
          net.history[idx].push(t);
          v = lif.v_reset;
          net.refractory_left[idx] = lif.refractory;
        }
        result.membrane[idx][static_cast<std::size_t>(t)] = v;
      }
      prev = cur;
    }
  }
  return result;
}

PlasticityRule PlasticityRule::make_sur(const SurRule& rule) {
  PlasticityRule r;
  r.tag = Tag::Sur;
  r.sur = rule;
  r.validate();
  return r;
}

PlasticityRule PlasticityRule::make_stdp(const StdpRule& rule) {
  PlasticityRule r;
  r.tag = Tag::Stdp;
  r.stdp = rule;
  r.validate();
  return r;
}

void PlasticityRule::validate() const {
  if (tag == Tag::Sur) {
    if (!(sur.eta > 0.0)) throw ConfigError("sur eta must be > 0");
    if (sur.window < 1) throw ConfigError("sur window must be >= 1");
  } else {
    if (!(stdp.a_plus > 0.0 && stdp.a_minus > 0.0)) throw ConfigError("stdp amplitudes must be > 0");
    if (!(stdp.tau_plus > 0.0 && stdp.tau_minus > 0.0)) throw ConfigError("stdp taus must be > 0");
  }
}

namespace {

void check_plasticity_shapes(const Matrix& weights, const std::vector<SpikeTrain>& pre,
                             const std::vector<SpikeTrain>& post) {
  if (static_cast<int>(pre.size()) != weights.cols || static_cast<int>(post.size()) != weights.rows)
    throw ShapeError("spike trains do not match the synapse matrix");
}

}  // namespace

Matrix sur_update(const Matrix& weights, const std::vector<SpikeTrain>& pre_trains,
                  const std::vector<SpikeTrain>& post_trains, const PlasticityRule& rule,
                  double w_min, double w_max, const BoolMatrix* frozen) {
  if (rule.tag != PlasticityRule::Tag::Sur) throw ConfigError("sur_update needs a SUR rule");
  rule.validate();
  check_plasticity_shapes(weights, pre_trains, post_trains);
  Matrix out = weights;
  for (int i = 0; i < weights.rows; ++i) {
    for (int j = 0; j < weights.cols; ++j) {
      if (frozen != nullptr && frozen->get(i, j)) continue;
      double dw = 0.0;
      for (int t_pre : pre_trains[static_cast<std::size_t>(j)].steps) {
        for (int t_post : post_trains[static_cast<std::size_t>(i)].steps) {
          int dt = t_post - t_pre;
          if (dt > 0 && dt <= rule.sur.window) dw += rule.sur.eta;
          else if (dt < 0 && -dt <= rule.sur.window) dw -= rule.sur.eta;
        }
      }
      out(i, j) = std::clamp(weights(i, j) + dw, w_min, w_max);
    }
  }
  return out;
}

Matrix stdp_update(const Matrix& weights, const std::vector<SpikeTrain>& pre_trains,
                   const std::vector<SpikeTrain>& post_trains, const PlasticityRule& rule,
                   double w_min, double w_max, const BoolMatrix* frozen) {
  if (rule.tag != PlasticityRule::Tag::Stdp) throw ConfigError("stdp_update needs an STDP rule");
  rule.validate();
  check_plasticity_shapes(weights, pre_trains, post_trains);
  Matrix out = weights;
  for (int i = 0; i < weights.rows; ++i) {
    for (int j = 0; j < weights.cols; ++j) {
      if (frozen != nullptr && frozen->get(i, j)) continue;
      double dw = 0.0;
      for (int t_pre : pre_trains[static_cast<std::size_t>(j)].steps) {
        for (int t_post : post_trains[static_cast<std::size_t>(i)].steps) {
          int dt = t_post - t_pre;
          if (dt > 0) dw += rule.stdp.a_plus * std::exp(-dt / rule.stdp.tau_plus);
          else if (dt < 0) dw -= rule.stdp.a_minus * std::exp(dt / rule.stdp.tau_minus);
        }
      }
      out(i, j) = std::clamp(weights(i, j) + dw, w_min, w_max);
    }
  }
  return out;
}

double rate_decode(const SpikeTrain& train, int T, double scale) {
  if (T < 1) throw ConfigError("rate_decode window T must be >= 1");
  return scale * static_cast<double>(train.steps.size()) / static_cast<double>(T);
}

namespace {

// Forward pass of the relaxed suffix; keeps everything the backward pass
// needs.
struct RelaxedTrace {
  // Indexed [suffix layer][step][unit].
  std::vector<std::vector<Vector>> current;  // pre-gate input current
  std::vector<std::vector<Vector>> voltage;
  std::vector<std::vector<Vector>> spike;    // sigma(beta (v - v_th))
  double rate = 0.0;
};

RelaxedTrace relaxed_suffix_forward(const SnnNetwork& net, int weight_layer,
                                    const std::vector<std::vector<std::uint8_t>>& pre_spikes,
                                    int T, const LifParams& lif, const SurrogateParams& params) {
  lif.validate();
  if (weight_layer < 0 || weight_layer >= net.weight_layer_count())
    throw ShapeError("weight layer out of range");
  if (net.layer_sizes.back() != 1)
    throw ShapeError("relaxed decoding expects a single output unit");

  const int first = weight_layer + 1;                      // first relaxed layer
  const int depth = net.layer_count() - first;             // suffix layer count
  const ActivationKind gate_kind =
      net.gate ? ActivationKind::srelu(net.gate->a, net.gate->b) : ActivationKind::identity();

  RelaxedTrace trace;
  trace.current.resize(static_cast<std::size_t>(depth));
  trace.voltage.resize(static_cast<std::size_t>(depth));
  trace.spike.resize(static_cast<std::size_t>(depth));

  std::vector<Vector> v(static_cast<std::size_t>(depth));
  for (int d = 0; d < depth; ++d)
    v[static_cast<std::size_t>(d)].assign(
        static_cast<std::size_t>(net.layer_sizes[static_cast<std::size_t>(first + d)]), lif.v_rest);

  double spike_sum = 0.0;
  for (int t = 0; t < T; ++t) {
    Vector prev_act;  // activity of the layer feeding the current one
    for (int d = 0; d < depth; ++d) {
      const int layer = first + d;
      const Matrix& w = net.weights[static_cast<std::size_t>(layer - 1)];
      Vector in(static_cast<std::size_t>(w.rows), 0.0);
      if (d == 0) {
        const auto& s = pre_spikes[static_cast<std::size_t>(t)];
        for (int i = 0; i < w.rows; ++i) {
          double acc = 0.0;
          for (int j = 0; j < w.cols; ++j)
            if (s[static_cast<std::size_t>(j)]) acc += w(i, j);
          in[static_cast<std::size_t>(i)] = acc;
        }
      } else {
        in = matvec(w, prev_act);
      }
      Vector& vl = v[static_cast<std::size_t>(d)];
      Vector sl(vl.size());
      for (std::size_t u = 0; u < vl.size(); ++u) {
        double gated = net.gate ? activate(gate_kind, in[u]) : in[u];
        vl[u] += (1.0 / lif.tau_m) * (-(vl[u] - lif.v_rest) + lif.r * gated);
        double s = 1.0 / (1.0 + std::exp(-params.beta * (vl[u] - lif.v_th)));
        sl[u] = s;
      }
      trace.current[static_cast<std::size_t>(d)].push_back(in);
      trace.voltage[static_cast<std::size_t>(d)].push_back(vl);
      trace.spike[static_cast<std::size_t>(d)].push_back(sl);
      prev_act = sl;
    }
    spike_sum += trace.spike.back().back().front();
  }
  trace.rate = params.decode_scale * spike_sum / static_cast<double>(T);
  return trace;
}

}  // namespace

double relaxed_suffix_rate(const SnnNetwork& net, int weight_layer,
                           const std::vector<std::vector<std::uint8_t>>& pre_spikes, int T,
                           const LifParams& lif, const SurrogateParams& params) {
  return relaxed_suffix_forward(net, weight_layer, pre_spikes, T, lif, params).rate;
}

std::vector<Matrix> surrogate_gradient(SnnNetwork& net,
                                       const std::vector<SpikeTrain>& input_trains, double y_true,
                                       int T, const LifParams& lif, const SurrogateParams& params) {
  SimResult sim = lif_simulate(net, input_trains, T, lif);

  // Dense per-layer recorded spikes feeding each weight matrix.
  std::vector<std::vector<std::vector<std::uint8_t>>> layer_spikes(
      static_cast<std::size_t>(net.layer_count()));
  for (int layer = 0; layer < net.layer_count(); ++layer) {
    std::vector<SpikeTrain> trains;
    for (int u = 0; u < net.layer_sizes[static_cast<std::size_t>(layer)]; ++u)
      trains.push_back(sim.trains[static_cast<std::size_t>(net.global_id(layer, u))]);
    layer_spikes[static_cast<std::size_t>(layer)] = dense_spikes(trains, T);
  }

  const ActivationKind gate_kind =
      net.gate ? ActivationKind::srelu(net.gate->a, net.gate->b) : ActivationKind::identity();

  std::vector<Matrix> grads;
  for (int wl = 0; wl < net.weight_layer_count(); ++wl) {
    const auto& pre = layer_spikes[static_cast<std::size_t>(wl)];
    RelaxedTrace trace = relaxed_suffix_forward(net, wl, pre, T, lif, params);

    const int first = wl + 1;
    const int depth = net.layer_count() - first;
    const double dl_dy = trace.rate - y_true;
    const double dy_ds = params.decode_scale / static_cast<double>(T);

    Matrix grad(net.weights[static_cast<std::size_t>(wl)].rows,
                net.weights[static_cast<std::size_t>(wl)].cols);

    // dL/dv carried from step t+1 back to step t, per suffix layer.
    std::vector<Vector> dv_future(static_cast<std::size_t>(depth));
    for (int d = 0; d < depth; ++d)
      dv_future[static_cast<std::size_t>(d)].assign(
          static_cast<std::size_t>(net.layer_sizes[static_cast<std::size_t>(first + d)]), 0.0);

    const double leak = 1.0 - 1.0 / lif.tau_m;
    const double drive = lif.r / lif.tau_m;

    for (int t = T - 1; t >= 0; --t) {
      Vector carried_ds;  // dL/ds of the next lower suffix layer, same step
      for (int d = depth - 1; d >= 0; --d) {
        const std::size_t du = static_cast<std::size_t>(d);
        const int layer = first + d;
        const Matrix& w = net.weights[static_cast<std::size_t>(layer - 1)];
        const Vector& s = trace.spike[du][static_cast<std::size_t>(t)];
        const Vector& in = trace.current[du][static_cast<std::size_t>(t)];

        Vector ds(s.size(), 0.0);
        if (d == depth - 1) {
          ds[0] = dl_dy * dy_ds;
        } else {
          ds = carried_ds;
        }
        Vector dI(s.size());
        for (std::size_t u = 0; u < s.size(); ++u) {
          double a_v = ds[u] * params.beta * s[u] * (1.0 - s[u]) + dv_future[du][u];
          dv_future[du][u] = a_v * leak;
          double dc = a_v * drive;
          dI[u] = net.gate ? dc * derivative(gate_kind, in[u]) : dc;
        }
        if (d == 0) {
          const auto& pre_t = pre[static_cast<std::size_t>(t)];
          for (int i = 0; i < grad.rows; ++i)
            if (dI[static_cast<std::size_t>(i)] != 0.0)
              for (int j = 0; j < grad.cols; ++j)
                if (pre_t[static_cast<std::size_t>(j)]) grad(i, j) += dI[static_cast<std::size_t>(i)];
        } else {
          carried_ds = matvec_t(w, dI);
        }
      }
    }
    grads.push_back(std::move(grad));
  }
  return grads;
}

void surrogate_backprop_step(SnnNetwork& net, const std::vector<SpikeTrain>& input_trains,
                             double y_true, double lr, int T, const LifParams& lif,
                             const SurrogateParams& params) {
  auto grads = surrogate_gradient(net, input_trains, y_true, T, lif, params);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Matrix& w = net.weights[l];
    for (int i = 0; i < w.rows; ++i)
      for (int j = 0; j < w.cols; ++j)
        if (!net.frozen[l].get(i, j)) w(i, j) -= lr * grads[l](i, j);
  }
}

void inject_snn_lesion(SnnNetwork& net, const LesionSpec& spec) {
  spec.validate_for(net.layer_sizes);
  const std::size_t in_l = static_cast<std::size_t>(spec.hidden_layer);
  const std::size_t out_l = in_l + 1;
  const int k = spec.neuron;
  if (spec.mode == LesionMode::ZeroIncoming || spec.mode == LesionMode::ZeroBoth) {
    Matrix& w = net.weights[in_l];
    for (int j = 0; j < w.cols; ++j) {
      w(k, j) = 0.0;
      if (spec.freeze) net.frozen[in_l].set(k, j, true);
    }
  }
  if (spec.mode == LesionMode::ZeroOutgoing || spec.mode == LesionMode::ZeroBoth) {
    Matrix& w = net.weights[out_l];
    for (int i = 0; i < w.rows; ++i) {
      w(i, k) = 0.0;
      if (spec.freeze) net.frozen[out_l].set(i, k, true);
    }
  }
}

void SnnLesionInjector::fire(SnnNetwork& net, const LesionSpec& spec) {
  if (fired) throw StateError("snn lesion already injected");
  inject_snn_lesion(net, spec);
  fired = true;
}

std::vector<std::vector<std::uint8_t>> dense_spikes(const std::vector<SpikeTrain>& trains, int T) {
  std::vector<std::vector<std::uint8_t>> dense(
      static_cast<std::size_t>(T), std::vector<std::uint8_t>(trains.size(), 0));
  for (std::size_t n = 0; n < trains.size(); ++n)
    for (int step : trains[n].steps) {
      if (step < 0 || step >= T) throw ShapeError("spike step outside the window");
      dense[static_cast<std::size_t>(step)][n] = 1;
    }
  return dense;
}

std::string raster_to_csv(const std::vector<SpikeTrain>& trains) {
  std::string out = "neuron_id,step\n";
  for (const auto& train : trains)
    for (int step : train.steps)
      out += std::to_string(train.neuron) + "," + std::to_string(step) + "\n";
  return out;
}

}  // namespace neurolesion
