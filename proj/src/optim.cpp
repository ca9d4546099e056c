#include "neurolesion/optim.hpp"

#include <charconv>
#include <cmath>

namespace neurolesion {

void SgdState::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("sgd learning rate must be > 0");
}

void AdamParams::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("adam beta1 must be in [0,1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adam beta2 must be in [0,1)");
  if (!(alpha > 0.0)) throw ConfigError("adam alpha must be > 0");
  if (!(epsilon > 0.0)) throw ConfigError("adam epsilon must be > 0");
}

AdamState AdamState::init_for(const Network& net, AdamParams params) {
  params.validate();
  AdamState state;
  state.params = params;
  for (int l = 0; l < net.weight_layer_count(); ++l) {
    const Matrix& w = net.weights[static_cast<std::size_t>(l)];
    state.m_weights.emplace_back(w.rows, w.cols);
    state.v_weights.emplace_back(w.rows, w.cols);
    state.m_biases.emplace_back(net.biases[static_cast<std::size_t>(l)].size(), 0.0);
    state.v_biases.emplace_back(net.biases[static_cast<std::size_t>(l)].size(), 0.0);
  }
  return state;
}

namespace {

void check_shapes(const Network& net, const Gradient& grad) {
  if (grad.weights.size() != net.weights.size() || grad.biases.size() != net.biases.size())
    throw ShapeError("gradient does not match network layer count");
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    if (!grad.weights[l].same_shape(net.weights[l]) ||
        grad.biases[l].size() != net.biases[l].size())
      throw ShapeError("gradient shape does not match network");
  }
}

}  // namespace

void sgd_step(Network& net, const Gradient& grad, const SgdState& state) {
  state.validate();
  check_shapes(net, grad);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Matrix& w = net.weights[l];
    const BoolMatrix& frozen = net.frozen_weights[l];
    for (int i = 0; i < w.rows; ++i)
      for (int j = 0; j < w.cols; ++j)
        if (!frozen.get(i, j)) w(i, j) -= state.learning_rate * grad.weights[l](i, j);
    for (std::size_t i = 0; i < net.biases[l].size(); ++i)
      if (!net.frozen_biases[l][i]) net.biases[l][i] -= state.learning_rate * grad.biases[l][i];
  }
}

std::pair<double, double> adam_bias_correction(double m, double v, std::uint64_t t, double beta1,
                                               double beta2) {
  if (t == 0) throw DomainError("adam bias correction undefined at t = 0");
  double m_hat = m / (1.0 - std::pow(beta1, static_cast<double>(t)));
  double v_hat = v / (1.0 - std::pow(beta2, static_cast<double>(t)));
  return {m_hat, v_hat};
}

void adam_step(Network& net, const Gradient& grad, AdamState& state) {
  state.params.validate();
  check_shapes(net, grad);
  if (state.m_weights.size() != net.weights.size())
    throw ShapeError("adam state does not match network");
  state.t += 1;
  const AdamParams& p = state.params;
  auto update = [&](double& w, double g, double& m, double& v, bool frozen) {
    if (frozen) return;  // g stays out of m, v; w untouched
    m = p.beta1 * m + (1.0 - p.beta1) * g;
    v = p.beta2 * v + (1.0 - p.beta2) * g * g;
    auto [m_hat, v_hat] = adam_bias_correction(m, v, state.t, p.beta1, p.beta2);
    w -= p.alpha * m_hat / (std::sqrt(v_hat) + p.epsilon);
  };
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Matrix& w = net.weights[l];
    for (int i = 0; i < w.rows; ++i)
      for (int j = 0; j < w.cols; ++j)
        update(w(i, j), grad.weights[l](i, j), state.m_weights[l](i, j), state.v_weights[l](i, j),
               net.frozen_weights[l].get(i, j));
    for (std::size_t i = 0; i < net.biases[l].size(); ++i)
      update(net.biases[l][i], grad.biases[l][i], state.m_biases[l][i], state.v_biases[l][i],
             net.frozen_biases[l][i] != 0);
  }
}

namespace {

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

std::string optimizer_tag(const SgdState& state) { return "sgd:lr=" + fmt(state.learning_rate); }

std::string optimizer_tag(const AdamParams& params) {
  return "adam:alpha=" + fmt(params.alpha) + ",beta1=" + fmt(params.beta1) +
         ",beta2=" + fmt(params.beta2) + ",eps=" + fmt(params.epsilon);
}

}  // namespace neurolesion
