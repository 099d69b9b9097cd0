#pragma once

#include <span>
#include <vector>

#include "binquant/binarizers.hpp"
#include "binquant/common.hpp"

namespace binquant {

// Geometric growth of the double-well sharpness mu from mu0 up to 1/alpha.
struct AnnealSchedule {
  double mu0 = 1.0;
  double alpha = 0.01;
  long epochs_to_max = 200;

  double gamma() const;   // (1/(alpha*mu0))^(1/epochs_to_max)
  void validate() const;  // throws ConfigError
};

// min{mu0 * gamma^epoch, 1/alpha}; returns exactly 1/alpha once saturated.
double anneal_mu(const AnnealSchedule& sched, long epoch);

enum class BetaRule { Hard, Soft };

// Per-element step size for the sharp regime (mu*alpha >= 1).  Active branch
// (sgn(theta)*grad > 0): beta = max{2, |theta|*(1+kEpsFlip)} / |grad|, nudged
// up one ulp if needed so beta*|grad| >= max{...} holds exactly; this keeps
// the finite-difference magnitude 2/beta provably <= |grad|.  Otherwise 1.
double choose_beta_hard_scalar(double theta, double grad);
void choose_beta_hard(std::span<const double> theta, std::span<const double> grad,
                      std::span<double> beta);
std::vector<double> choose_beta_hard(std::span<const double> theta,
                                     std::span<const double> grad);

// Soft regime (double-well with mu*alpha < 1).  Stated for theta < 0; theta >= 0
// goes through the mirror (theta, grad) -> (-theta, -grad).  Descending side
// (grad > 0): beta = min{beta_max, (theta + 1 - mu*alpha)/grad}, clamped below
// by kEpsFlip if non-positive.  Ascending side (grad < 0): beta =
// (theta/grad)*(1+kEpsFlip), the kink-crossing choice, used in every sub-case.
// grad = 0: beta = 1.
double choose_beta_soft_scalar(double theta, double grad, const BinarizerSpec& spec,
                               double beta_max);
void choose_beta_soft(std::span<const double> theta, std::span<const double> grad,
                      const BinarizerSpec& spec, double beta_max, std::span<double> beta);
std::vector<double> choose_beta_soft(std::span<const double> theta,
                                     std::span<const double> grad,
                                     const BinarizerSpec& spec, double beta_max);

// g = (s(theta) - s(theta - beta .* grad)) ./ beta, the finite-difference
// surrogate actually used to update the latents.
double effective_gradient_scalar(double theta, double grad, double beta,
                                 const BinarizerSpec& spec);
void effective_gradient(std::span<const double> theta, std::span<const double> grad,
                        std::span<const double> beta, const BinarizerSpec& spec,
                        std::span<double> out);
std::vector<double> effective_gradient(std::span<const double> theta,
                                       std::span<const double> grad,
                                       std::span<const double> beta,
                                       const BinarizerSpec& spec);

// Latent weights + heavy-ball state for a list of parameter tensors.
struct AdaSteState {
  std::vector<std::vector<double>> theta;
  std::vector<std::vector<double>> momentum_buf;  // same shapes, zeros at start
  BinarizerSpec spec;
  BetaRule beta_rule = BetaRule::Hard;
  double beta_max = 1e6;
  long long step_count = 0;
};

AdaSteState make_adaste_state(std::vector<std::vector<double>> theta, BinarizerSpec spec,
                              BetaRule rule = BetaRule::Hard, double beta_max = 1e6);

// One update: per tensor, beta selection, effective gradient, momentum on the
// effective gradient, theta -= lr * buf.  momentum = 0 recovers the plain rule.
void adaste_step(AdaSteState& state, const std::vector<std::vector<double>>& grads,
                 double lr, double momentum);

}  // namespace binquant
