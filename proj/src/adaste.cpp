#include "binquant/adaste.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace binquant {

double AnnealSchedule::gamma() const {
  return std::pow(1.0 / (alpha * mu0), 1.0 / double(epochs_to_max));
}

void AnnealSchedule::validate() const {
  if (!(mu0 > 0.0) || !std::isfinite(mu0))
    throw ConfigError("anneal schedule: mu0 must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("anneal schedule: alpha must lie in (0,1)");
  if (epochs_to_max < 1)
    throw ConfigError("anneal schedule: epochs_to_max must be >= 1");
  if (mu0 * alpha > 1.0)
    throw ConfigError("anneal schedule: mu0 must not exceed 1/alpha");
}

double anneal_mu(const AnnealSchedule& sched, long epoch) {
  if (epoch < 0) throw std::invalid_argument("anneal_mu: negative epoch");
  double cap = 1.0 / sched.alpha;
  if (epoch >= sched.epochs_to_max) return cap;  // saturated: exactly 1/alpha
  // mu0 * gamma^epoch written as one pow so mu(epochs_to_max) hits the cap
  // to full precision rather than through accumulated products.
  double mu = sched.mu0 * std::pow(1.0 / (sched.alpha * sched.mu0),
                                   double(epoch) / double(sched.epochs_to_max));
  return std::min(mu, cap);
}

double choose_beta_hard_scalar(double theta, double grad) {
  if (sgn(theta) * grad > 0.0) {
    double ag = std::abs(grad);
    double m = std::max(2.0, std::abs(theta) * (1.0 + kEpsFlip));
    double beta = m / ag;
    if (!std::isfinite(beta)) return std::numeric_limits<double>::max();
    // One-ulp guard: make beta*|grad| >= m exact so 2/beta can never round
    // above |grad| (the divide/divide round trip is not exact on its own).
    if (std::fma(beta, ag, -m) < 0.0)
      beta = std::nextafter(beta, std::numeric_limits<double>::infinity());
    return beta;
  }
  return 1.0;  // covers the descent-agreeing branch and grad = 0
}

void choose_beta_hard(std::span<const double> theta, std::span<const double> grad,
                      std::span<double> beta) {
  if (theta.size() != grad.size() || beta.size() != theta.size())
    throw std::invalid_argument("choose_beta_hard: shape mismatch");
  check_finite(grad, "choose_beta_hard: grad");
  for (std::size_t j = 0; j < theta.size(); ++j)
    beta[j] = choose_beta_hard_scalar(theta[j], grad[j]);
}

std::vector<double> choose_beta_hard(std::span<const double> theta,
                                     std::span<const double> grad) {
  std::vector<double> beta(theta.size());
  choose_beta_hard(theta, grad, beta);
  return beta;
}

double choose_beta_soft_scalar(double theta, double grad, const BinarizerSpec& spec,
                               double beta_max) {
  // Mirror theta >= 0 into the canonical theta < 0 frame (sgn(0) = +1 puts
  // theta = 0 through the mirror as well).
  double tc = theta, gc = grad;
  if (sgn(theta) > 0.0) {
    tc = -theta;
    gc = -grad;
  }
  if (gc > 0.0) {
    double b = (tc + 1.0 - spec.mu * spec.alpha) / gc;
    b = std::min(beta_max, b);
    return b > 0.0 ? b : kEpsFlip;
  }
  if (gc < 0.0) {
    // Kink-crossing choice theta/grad, inflated to cross strictly; at the
    // mirrored origin tc = 0 this degenerates to 0, clamp it positive.
    double b = (tc / gc) * (1.0 + kEpsFlip);
    return b > 0.0 ? b : kEpsFlip;
  }
  return 1.0;
}

void choose_beta_soft(std::span<const double> theta, std::span<const double> grad,
                      const BinarizerSpec& spec, double beta_max, std::span<double> beta) {
  if (spec.kind != BinKind::DoubleWell || spec.hard())
    throw ConfigError(
        "choose_beta_soft: requires a double-well binarizer with mu*alpha < 1 "
        "(use choose_beta_hard otherwise)");
  if (!(beta_max > 0.0))
    throw ConfigError("choose_beta_soft: beta_max must be positive");
  if (theta.size() != grad.size() || beta.size() != theta.size())
    throw std::invalid_argument("choose_beta_soft: shape mismatch");
  check_finite(grad, "choose_beta_soft: grad");
  for (std::size_t j = 0; j < theta.size(); ++j)
    beta[j] = choose_beta_soft_scalar(theta[j], grad[j], spec, beta_max);
}

std::vector<double> choose_beta_soft(std::span<const double> theta,
                                     std::span<const double> grad,
                                     const BinarizerSpec& spec, double beta_max) {
  std::vector<double> beta(theta.size());
  choose_beta_soft(theta, grad, spec, beta_max, beta);
  return beta;
}

double effective_gradient_scalar(double theta, double grad, double beta,
                                 const BinarizerSpec& spec) {
  double wstar = forward_map_scalar(theta, spec);
  double what = perturbed_map_scalar(theta, beta, grad, spec);
  return (wstar - what) / beta;
}

void effective_gradient(std::span<const double> theta, std::span<const double> grad,
                        std::span<const double> beta, const BinarizerSpec& spec,
                        std::span<double> out) {
  spec.validate();
  if (theta.size() != grad.size() || beta.size() != theta.size() ||
      out.size() != theta.size())
    throw std::invalid_argument("effective_gradient: shape mismatch");
  for (std::size_t j = 0; j < beta.size(); ++j)
    if (!(beta[j] > 0.0))
      throw std::invalid_argument("effective_gradient: beta must be positive, element " +
                                  std::to_string(j));
  for (std::size_t j = 0; j < theta.size(); ++j)
    out[j] = effective_gradient_scalar(theta[j], grad[j], beta[j], spec);
}

std::vector<double> effective_gradient(std::span<const double> theta,
                                       std::span<const double> grad,
                                       std::span<const double> beta,
                                       const BinarizerSpec& spec) {
  std::vector<double> out(theta.size());
  effective_gradient(theta, grad, beta, spec, out);
  return out;
}

AdaSteState make_adaste_state(std::vector<std::vector<double>> theta, BinarizerSpec spec,
                              BetaRule rule, double beta_max) {
  spec.validate();
  AdaSteState st;
  st.momentum_buf.reserve(theta.size());
  for (const auto& t : theta) st.momentum_buf.emplace_back(t.size(), 0.0);
  st.theta = std::move(theta);
  st.spec = spec;
  st.beta_rule = rule;
  st.beta_max = beta_max;
  return st;
}

void adaste_step(AdaSteState& state, const std::vector<std::vector<double>>& grads,
                 double lr, double momentum) {
  if (!(lr > 0.0)) throw ConfigError("adaste_step: lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw ConfigError("adaste_step: momentum must lie in [0,1)");
  if (grads.size() != state.theta.size())
    throw std::invalid_argument("adaste_step: tensor count mismatch");
  if (state.beta_rule == BetaRule::Soft &&
      (state.spec.kind != BinKind::DoubleWell || state.spec.hard()))
    throw ConfigError("adaste_step: the soft beta rule needs a double-well spec with "
                      "mu*alpha < 1");

  for (std::size_t k = 0; k < state.theta.size(); ++k) {
    auto& th = state.theta[k];
    auto& buf = state.momentum_buf[k];
    const auto& g = grads[k];
    if (g.size() != th.size())
      throw std::invalid_argument("adaste_step: shape mismatch in tensor " +
                                  std::to_string(k));
    for (std::size_t j = 0; j < th.size(); ++j) {
      if (!std::isfinite(g[j]))
        throw std::invalid_argument("adaste_step: non-finite gradient, tensor " +
                                    std::to_string(k) + " element " + std::to_string(j));
      double beta = state.beta_rule == BetaRule::Hard
                        ? choose_beta_hard_scalar(th[j], g[j])
                        : choose_beta_soft_scalar(th[j], g[j], state.spec, state.beta_max);
      double ge = effective_gradient_scalar(th[j], g[j], beta, state.spec);
      if (!std::isfinite(ge))
        throw NumericError("adaste_step: non-finite effective gradient, tensor " +
                           std::to_string(k) + " element " + std::to_string(j));
      buf[j] = momentum * buf[j] + ge;
      th[j] -= lr * buf[j];
    }
  }
  state.step_count += 1;
}

}  // namespace binquant
