#include "binquant/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace binquant {

void ste_step(std::span<const double> theta, std::span<const double> grad_at_sign,
              double lr, bool clip, std::span<double> out) {
  if (!(lr > 0.0)) throw ConfigError("ste_step: lr must be positive");
  if (theta.size() != grad_at_sign.size() || out.size() != theta.size())
    throw std::invalid_argument("ste_step: shape mismatch");
  for (std::size_t j = 0; j < theta.size(); ++j) {
    double t = theta[j] - lr * grad_at_sign[j];
    out[j] = clip ? std::clamp(t, -1.0, 1.0) : t;
  }
}

std::vector<double> ste_step(std::span<const double> theta,
                             std::span<const double> grad_at_sign, double lr, bool clip) {
  std::vector<double> out(theta.size());
  ste_step(theta, grad_at_sign, lr, clip, out);
  return out;
}

void proxquant_step(std::span<const double> theta, std::span<const double> grad_at_theta,
                    double lr, double lambda, std::span<double> out) {
  if (!(lr > 0.0)) throw ConfigError("proxquant_step: lr must be positive");
  if (theta.size() != grad_at_theta.size() || out.size() != theta.size())
    throw std::invalid_argument("proxquant_step: shape mismatch");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ConfigError("proxquant_step: lambda must be nonnegative and finite");
  for (std::size_t j = 0; j < theta.size(); ++j)
    out[j] = prox_w_shape_scalar(theta[j] - lr * grad_at_theta[j], lambda);
}

std::vector<double> proxquant_step(std::span<const double> theta,
                                   std::span<const double> grad_at_theta, double lr,
                                   double lambda) {
  std::vector<double> out(theta.size());
  proxquant_step(theta, grad_at_theta, lr, lambda, out);
  return out;
}

void md_softmax_step(std::span<double> w_simplex, std::span<const double> grad, double lr) {
  if (!(lr > 0.0)) throw ConfigError("md_softmax_step: lr must be positive");
  if (w_simplex.empty() || w_simplex.size() != grad.size())
    throw std::invalid_argument("md_softmax_step: bad shapes");
  double vmax = -lr * grad[0];
  for (std::size_t j = 1; j < grad.size(); ++j) vmax = std::max(vmax, -lr * grad[j]);
  double s = 0.0;
  for (std::size_t j = 0; j < w_simplex.size(); ++j) {
    w_simplex[j] *= std::exp(-lr * grad[j] - vmax);
    s += w_simplex[j];
  }
  if (!(s > 0.0) || !std::isfinite(s))
    throw NumericError("md_softmax_step: normalizer collapsed to " + std::to_string(s));
  for (std::size_t j = 0; j < w_simplex.size(); ++j) w_simplex[j] /= s;
}

void md_softmax_step_pair(std::span<double> p_plus, std::span<double> p_minus,
                          std::span<const double> v, double lr) {
  if (!(lr > 0.0)) throw ConfigError("md_softmax_step_pair: lr must be positive");
  if (p_plus.size() != p_minus.size() || v.size() != p_plus.size())
    throw std::invalid_argument("md_softmax_step_pair: shape mismatch");
  for (std::size_t j = 0; j < v.size(); ++j) {
    double c = std::abs(lr * v[j]);  // max of the two shifted exponents
    double a = p_plus[j] * std::exp(-lr * v[j] - c);
    double b = p_minus[j] * std::exp(lr * v[j] - c);
    double s = a + b;
    if (!(s > 0.0) || !std::isfinite(s))
      throw NumericError("md_softmax_step_pair: normalizer collapsed at element " +
                         std::to_string(j));
    p_plus[j] = a / s;
    p_minus[j] = b / s;
  }
}

void md_tanh_step(std::span<const double> theta, std::span<const double> grad_at_w,
                  double lr, double tau, std::span<double> out) {
  if (!(lr > 0.0)) throw ConfigError("md_tanh_step: lr must be positive");
  if (!(tau > 0.0)) throw ConfigError("md_tanh_step: tau must be positive");
  if (theta.size() != grad_at_w.size() || out.size() != theta.size())
    throw std::invalid_argument("md_tanh_step: shape mismatch");
  for (std::size_t j = 0; j < theta.size(); ++j) out[j] = theta[j] - lr * grad_at_w[j];
}

std::vector<double> md_tanh_step(std::span<const double> theta,
                                 std::span<const double> grad_at_w, double lr, double tau) {
  std::vector<double> out(theta.size());
  md_tanh_step(theta, grad_at_w, lr, tau, out);
  return out;
}

}  // namespace binquant
