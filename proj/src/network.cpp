#include "neurolesion/network.hpp"

#include <cmath>

#include <json.hpp>

#include "neurolesion/hash.hpp"

namespace neurolesion {

void TrainConfig::validate() const {
  if (!(l2_lambda >= 0.0)) throw ConfigError("l2_lambda must be >= 0");
  if (!(dropout_keep > 0.0 && dropout_keep <= 1.0)) throw ConfigError("dropout_keep must be in (0,1]");
  if (epochs <= 0) throw ConfigError("epochs must be positive");
}

int Network::param_count() const {
  int n = 0;
  for (int l = 0; l < weight_layer_count(); ++l)
    n += layer_sizes[static_cast<std::size_t>(l + 1)] * layer_sizes[static_cast<std::size_t>(l)] +
         layer_sizes[static_cast<std::size_t>(l + 1)];
  return n;
}

Network init_network(const std::vector<int>& layer_sizes,
                     const std::vector<ActivationKind>& activations, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw ConfigError("network needs at least 2 layers");
  for (int s : layer_sizes)
    if (s < 1) throw ConfigError("every layer needs at least 1 unit");
  if (activations.size() != layer_sizes.size() - 1)
    throw ConfigError("need one activation per non-input layer");
  for (const auto& k : activations) k.validate();

  Network net;
  net.layer_sizes = layer_sizes;
  net.activations = activations;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    int fan_in = layer_sizes[l];
    int fan_out = layer_sizes[l + 1];
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    SplitMix64 rng(derive_seed(seed, Stream::kWeightInit, l));
    Matrix w(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j) w(i, j) = rng.next_uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(static_cast<std::size_t>(fan_out), 0.0);
    net.frozen_weights.emplace_back(fan_out, fan_in, false);
    net.frozen_biases.emplace_back(static_cast<std::size_t>(fan_out), 0);
  }
  return net;
}

namespace {

void check_input(const Network& net, const Vector& x) {
  if (static_cast<int>(x.size()) != net.layer_sizes.front())
    throw ShapeError("input width does not match the input layer");
}

ForwardTrace forward_impl(const Network& net, const Vector& x, const TrainConfig* config,
                          std::uint64_t step) {
  check_input(net, x);
  ForwardTrace trace;
  trace.act.push_back(x);
  const bool dropout =
      config != nullptr && config->dropout_keep < 1.0 && net.weight_layer_count() > 1;
  for (int l = 0; l < net.weight_layer_count(); ++l) {
    Vector z = matvec(net.weights[static_cast<std::size_t>(l)], trace.act.back());
    const Vector& bias = net.biases[static_cast<std::size_t>(l)];
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += bias[i];
    Vector a(z.size());
    const ActivationKind& kind = net.activations[static_cast<std::size_t>(l)];
    for (std::size_t i = 0; i < z.size(); ++i) a[i] = activate(kind, z[i]);
    if (dropout) {
      const bool hidden = l + 1 < net.weight_layer_count();
      Vector scale = hidden ? make_dropout_mask(static_cast<int>(z.size()), config->dropout_keep,
                                                config->seed, step, l)
                            : Vector(z.size(), 1.0);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] *= scale[i];
      trace.dropout_scale.push_back(std::move(scale));
    }
    trace.pre.push_back(std::move(z));
    trace.act.push_back(std::move(a));
  }
  trace.y_pred = trace.act.back().front();
  return trace;
}

}  // namespace

ForwardTrace forward(const Network& net, const Vector& x) {
  return forward_impl(net, x, nullptr, 0);
}

ForwardTrace forward_train(const Network& net, const Vector& x, const TrainConfig& config,
                           std::uint64_t step) {
  config.validate();
  return forward_impl(net, x, &config, step);
}

Vector make_dropout_mask(int size, double keep, std::uint64_t seed, std::uint64_t step,
                         int hidden_layer) {
  if (!(keep > 0.0 && keep <= 1.0)) throw ConfigError("dropout keep must be in (0,1]");
  Vector mask(static_cast<std::size_t>(size), 1.0);
  if (keep == 1.0) return mask;
  SplitMix64 rng(derive_seed(seed, Stream::kDropout, step, static_cast<std::uint64_t>(hidden_layer)));
  for (auto& m : mask) m = rng.next_double() < keep ? 1.0 / keep : 0.0;
  return mask;
}

double mse_loss(double y_true, double y_pred) {
  if (!std::isfinite(y_true) || !std::isfinite(y_pred))
    throw DomainError("mse_loss requires finite inputs");
  double d = y_true - y_pred;
  return 0.5 * d * d;
}

Gradient zero_gradient_like(const Network& net) {
  Gradient g;
  for (int l = 0; l < net.weight_layer_count(); ++l) {
    g.weights.emplace_back(net.weights[static_cast<std::size_t>(l)].rows,
                           net.weights[static_cast<std::size_t>(l)].cols);
    g.biases.emplace_back(net.biases[static_cast<std::size_t>(l)].size(), 0.0);
  }
  return g;
}

namespace {

void check_trace(const Network& net, const ForwardTrace& trace, const Vector& y_true) {
  const std::size_t nl = static_cast<std::size_t>(net.weight_layer_count());
  if (trace.act.size() != nl + 1 || trace.pre.size() != nl)
    throw ShapeError("trace does not match network depth");
  for (std::size_t l = 0; l < nl; ++l)
    if (trace.pre[l].size() != static_cast<std::size_t>(net.layer_sizes[l + 1]))
      throw ShapeError("trace layer width does not match network");
  if (y_true.size() != trace.act.back().size())
    throw ShapeError("target width does not match the output layer");
  if (!trace.dropout_scale.empty() && trace.dropout_scale.size() != nl)
    throw ShapeError("trace dropout masks do not match network depth");
}

}  // namespace

Gradient backward(const Network& net, const ForwardTrace& trace, const Vector& y_true,
                  const TrainConfig& config) {
  config.validate();
  check_trace(net, trace, y_true);
  const int nl = net.weight_layer_count();
  Gradient grad = zero_gradient_like(net);

  // delta = dL/dz for the current non-input layer, walking backwards.
  Vector delta;
  for (int l = nl - 1; l >= 0; --l) {
    const std::size_t lu = static_cast<std::size_t>(l);
    const Vector& z = trace.pre[lu];
    Vector dl_da;
    if (l == nl - 1) {
      const Vector& a = trace.act[lu + 1];
      dl_da.resize(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) dl_da[i] = a[i] - y_true[i];
    } else {
      dl_da = matvec_t(net.weights[lu + 1], delta);
    }
    delta.assign(z.size(), 0.0);
    const ActivationKind& kind = net.activations[lu];
    for (std::size_t i = 0; i < z.size(); ++i) {
      double scale = trace.dropout_scale.empty() ? 1.0 : trace.dropout_scale[lu][i];
      delta[i] = dl_da[i] * scale * derivative(kind, z[i]);
    }
    Matrix& gw = grad.weights[lu];
    const Vector& a_prev = trace.act[lu];
    for (int i = 0; i < gw.rows; ++i) {
      const std::size_t iu = static_cast<std::size_t>(i);
      for (int j = 0; j < gw.cols; ++j)
        gw(i, j) = delta[iu] * a_prev[static_cast<std::size_t>(j)] +
                   2.0 * config.l2_lambda * net.weights[lu](i, j);
      grad.biases[lu][iu] = delta[iu];
    }
  }

  // Frozen positions never receive updates.
  for (int l = 0; l < nl; ++l) {
    const std::size_t lu = static_cast<std::size_t>(l);
    const BoolMatrix& fw = net.frozen_weights[lu];
    for (int i = 0; i < fw.rows; ++i)
      for (int j = 0; j < fw.cols; ++j)
        if (fw.get(i, j)) grad.weights[lu](i, j) = 0.0;
    for (std::size_t i = 0; i < grad.biases[lu].size(); ++i)
      if (net.frozen_biases[lu][i]) grad.biases[lu][i] = 0.0;
  }
  return grad;
}

Gradient backward(const Network& net, const ForwardTrace& trace, double y_true,
                  const TrainConfig& config) {
  return backward(net, trace, Vector{y_true}, config);
}

double total_loss(const Network& net, const ForwardTrace& trace, const Vector& y_true,
                  const TrainConfig& config) {
  check_trace(net, trace, y_true);
  const Vector& a = trace.act.back();
  double loss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = y_true[i] - a[i];
    loss += 0.5 * d * d;
  }
  for (const Matrix& w : net.weights)
    for (double v : w.data) loss += config.l2_lambda * v * v;
  return loss;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  return nlohmann::json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols))
    throw ConfigError("checkpoint matrix shape mismatch");
  return m;
}

}  // namespace

std::string network_to_json(const Network& net) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["layer_sizes"] = net.layer_sizes;
  nlohmann::json acts = nlohmann::json::array();
  for (const auto& k : net.activations) acts.push_back(activation_tag(k));
  j["activations"] = acts;
  nlohmann::json ws = nlohmann::json::array();
  for (const auto& w : net.weights) ws.push_back(matrix_to_json(w));
  j["weights"] = ws;
  j["biases"] = net.biases;
  nlohmann::json fw = nlohmann::json::array();
  for (const auto& f : net.frozen_weights)
    fw.push_back(nlohmann::json{{"rows", f.rows}, {"cols", f.cols}, {"data", f.data}});
  j["frozen_weights"] = fw;
  j["frozen_biases"] = net.frozen_biases;
  j["prng"] = "splitmix64 substreams per (purpose, layer, step)";
  return j.dump();
}

Network network_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("format_version").get<int>() != 1) throw ConfigError("unsupported checkpoint version");
  Network net;
  net.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  for (const auto& tag : j.at("activations"))
    net.activations.push_back(parse_activation_tag(tag.get<std::string>()));
  for (const auto& w : j.at("weights")) net.weights.push_back(matrix_from_json(w));
  net.biases = j.at("biases").get<std::vector<Vector>>();
  for (const auto& f : j.at("frozen_weights")) {
    BoolMatrix m(f.at("rows").get<int>(), f.at("cols").get<int>());
    m.data = f.at("data").get<std::vector<std::uint8_t>>();
    net.frozen_weights.push_back(std::move(m));
  }
  net.frozen_biases = j.at("frozen_biases").get<std::vector<std::vector<std::uint8_t>>>();
  return net;
}

std::uint64_t checkpoint_hash(const Network& net) { return fnv1a64(network_to_json(net)); }

}  // namespace neurolesion
