#include "binquant/binarizers.hpp"

#include <algorithm>
#include <cmath>

namespace binquant {

void BinarizerSpec::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw ConfigError("binarizer: tau must be positive and finite");
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw ConfigError("binarizer: mu must be positive and finite");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("binarizer: alpha must lie in (0,1)");
}

double forward_map_scalar(double theta, const BinarizerSpec& spec) {
  switch (spec.kind) {
    case BinKind::Tanh:
      return std::tanh(theta / spec.tau);
    case BinKind::HardTanh:
      return std::clamp(theta / spec.tau, -1.0, 1.0);
    case BinKind::DoubleWell: {
      double t = (theta + spec.mu * (1.0 + spec.alpha) * sgn(theta)) / (1.0 + spec.mu);
      return std::clamp(t, -1.0, 1.0);
    }
  }
  return 0.0;  // unreachable
}

void forward_map(std::span<const double> theta, const BinarizerSpec& spec,
                 std::span<double> out) {
  spec.validate();
  check_finite(theta, "forward_map: theta");
  for (std::size_t j = 0; j < theta.size(); ++j) out[j] = forward_map_scalar(theta[j], spec);
}

std::vector<double> forward_map(std::span<const double> theta, const BinarizerSpec& spec) {
  std::vector<double> out(theta.size());
  forward_map(theta, spec, out);
  return out;
}

double perturbed_map_scalar(double theta, double beta, double grad,
                            const BinarizerSpec& spec) {
  return forward_map_scalar(theta - beta * grad, spec);
}

void perturbed_map(std::span<const double> theta, std::span<const double> beta,
                   std::span<const double> grad, const BinarizerSpec& spec,
                   std::span<double> out) {
  spec.validate();
  check_finite(theta, "perturbed_map: theta");
  check_finite(grad, "perturbed_map: grad");
  for (std::size_t j = 0; j < beta.size(); ++j) {
    if (!(beta[j] > 0.0))
      throw std::invalid_argument("perturbed_map: beta must be positive, element " +
                                  std::to_string(j));
  }
  for (std::size_t j = 0; j < theta.size(); ++j)
    out[j] = perturbed_map_scalar(theta[j], beta[j], grad[j], spec);
}

std::vector<double> perturbed_map(std::span<const double> theta, std::span<const double> beta,
                                  std::span<const double> grad, const BinarizerSpec& spec) {
  std::vector<double> out(theta.size());
  perturbed_map(theta, beta, grad, spec, out);
  return out;
}

namespace {
inline double xlogx(double u) { return u == 0.0 ? 0.0 : u * std::log(u); }
}  // namespace

double inner_energy(double w, double theta, const BinarizerSpec& spec) {
  if (!(w >= -1.0 && w <= 1.0))
    throw std::domain_error("inner_energy: w outside [-1,1]");
  switch (spec.kind) {
    case BinKind::Tanh: {
      double u = 0.5 * (1.0 - w);
      return spec.tau * (xlogx(u) + xlogx(1.0 - u)) - w * theta;
    }
    case BinKind::HardTanh:
      return 0.5 * spec.tau * w * w - w * theta;
    case BinKind::DoubleWell:
      return 0.5 * (1.0 + spec.mu) * w * w - w * theta -
             spec.mu * (1.0 + spec.alpha) * std::abs(w);
  }
  return 0.0;  // unreachable
}

double prox_w_shape_scalar(double theta, double lambda) {
  double t = sgn(theta);  // nearest binary target
  if (std::abs(theta - t) <= lambda) return t;
  return theta + lambda * (t > theta ? 1.0 : -1.0);
}

void prox_w_shape(std::span<const double> theta, double lambda, std::span<double> out) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ConfigError("prox_w_shape: lambda must be nonnegative and finite");
  for (std::size_t j = 0; j < theta.size(); ++j) out[j] = prox_w_shape_scalar(theta[j], lambda);
}

std::vector<double> prox_w_shape(std::span<const double> theta, double lambda) {
  std::vector<double> out(theta.size());
  prox_w_shape(theta, lambda, out);
  return out;
}

void softargmax(std::span<const double> u, std::span<double> out) {
  if (u.empty()) throw std::invalid_argument("softargmax: empty input");
  check_finite(u, "softargmax: input");
  double m = u[0];
  for (double v : u) m = std::max(m, v);
  double s = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    out[j] = std::exp(u[j] - m);
    s += out[j];
  }
  for (std::size_t j = 0; j < u.size(); ++j) out[j] /= s;
}

std::vector<double> softargmax(std::span<const double> u) {
  std::vector<double> out(u.size());
  softargmax(u, out);
  return out;
}

}  // namespace binquant
