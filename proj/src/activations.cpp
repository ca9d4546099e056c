#include "neurolesion/activations.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace neurolesion {

namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

void require_finite(double x) {
  if (!std::isfinite(x)) throw DomainError("activation input must be finite");
}

}  // namespace

void ActivationKind::validate() const {
  switch (tag) {
    case Activation::LeakyReLU:
      if (!(slope > 0.0 && slope < 1.0)) throw ConfigError("leakyrelu slope must be in (0,1)");
      break;
    case Activation::SReLU:
      if (!(a >= 0.0)) throw ConfigError("srelu requires a >= 0");
      if (!(b > 0.0)) throw ConfigError("srelu requires b > 0");
      if (!(a + b > 0.0)) throw ConfigError("srelu requires a + b > 0");
      break;
    default:
      break;
  }
}

double activate(const ActivationKind& kind, double x) {
  require_finite(x);
  switch (kind.tag) {
    case Activation::Sigmoid:
      return logistic(x);
    case Activation::ReLU:
      return x > 0.0 ? x : 0.0;
    case Activation::LeakyReLU:
      return x >= 0.0 ? x : kind.slope * x;
    case Activation::SReLU:
      if (x > kind.b) return x;
      if (x < -kind.a) return 0.0;
      return (x + kind.a) * (kind.b - x) / (kind.b + kind.a);
    case Activation::Identity:
      return x;
  }
  throw DomainError("unknown activation tag");
}

double derivative(const ActivationKind& kind, double x) {
  require_finite(x);
  switch (kind.tag) {
    case Activation::Sigmoid: {
      double s = logistic(x);
      return s * (1.0 - s);
    }
    case Activation::ReLU:
      // Subgradient 0 at x == 0: a neuron whose pre-activation is pinned at
      // zero receives no update, so dead ReLU units stay dead.
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::LeakyReLU:
      return x >= 0.0 ? 1.0 : kind.slope;
    case Activation::SReLU:
      // Both knees take the middle-branch value.
      if (x > kind.b) return 1.0;
      if (x < -kind.a) return 0.0;
      return (kind.b - kind.a - 2.0 * x) / (kind.b + kind.a);
    case Activation::Identity:
      return 1.0;
  }
  throw DomainError("unknown activation tag");
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty()) throw ConfigError("bad number in activation tag: " + s);
  return v;
}

}  // namespace

std::string activation_tag(const ActivationKind& kind) {
  switch (kind.tag) {
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::ReLU:
      return "relu";
    case Activation::LeakyReLU:
      return "leakyrelu:" + fmt_double(kind.slope);
    case Activation::SReLU:
      return "srelu:" + fmt_double(kind.a) + ":" + fmt_double(kind.b);
    case Activation::Identity:
      return "identity";
  }
  throw ConfigError("unknown activation tag");
}

ActivationKind parse_activation_tag(const std::string& tag) {
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      std::size_t pos = s.find(':', start);
      if (pos == std::string::npos) {
        parts.push_back(s.substr(start));
        break;
      }
      parts.push_back(s.substr(start, pos - start));
      start = pos + 1;
    }
    return parts;
  };
  auto parts = split(tag);
  const std::string& name = parts[0];
  if (name == "sigmoid" && parts.size() == 1) return ActivationKind::sigmoid();
  if (name == "relu" && parts.size() == 1) return ActivationKind::relu();
  if (name == "identity" && parts.size() == 1) return ActivationKind::identity();
  if (name == "leakyrelu") {
    if (parts.size() == 1) return ActivationKind::leaky_relu();
    if (parts.size() == 2) return ActivationKind::leaky_relu(parse_double(parts[1]));
  }
  if (name == "srelu") {
    if (parts.size() == 1) return ActivationKind::srelu();
    if (parts.size() == 3) return ActivationKind::srelu(parse_double(parts[1]), parse_double(parts[2]));
  }
  throw ConfigError("unrecognized activation tag: " + tag);
}

}  // namespace neurolesion
