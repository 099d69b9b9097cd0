#pragma once

#include <span>
#include <vector>

#include "binquant/binarizers.hpp"
#include "binquant/common.hpp"

namespace binquant {

// Comparison optimizers, each a pure per-tensor update.  The training harness
// owns their schedules (lambda, tau) and momentum buffers; every function
// here is stateless.  `out` may alias `theta`.

// Straight-through step: plain descent on the latent using the gradient taken
// at sgn(theta), then optional clip of the latent to [-1,1].
void ste_step(std::span<const double> theta, std::span<const double> grad_at_sign,
              double lr, bool clip, std::span<double> out);
std::vector<double> ste_step(std::span<const double> theta,
                             std::span<const double> grad_at_sign, double lr, bool clip);

// Proximal step: prox of the W-shaped penalty applied to the descent point.
void proxquant_step(std::span<const double> theta, std::span<const double> grad_at_theta,
                    double lr, double lambda, std::span<double> out);
std::vector<double> proxquant_step(std::span<const double> theta,
                                   std::span<const double> grad_at_theta, double lr,
                                   double lambda);

// Entropic mirror descent on the probability simplex: w_j <- w_j * e^{-lr g_j},
// renormalized (exponent shifted by its max for stability).  In place.
void md_softmax_step(std::span<double> w_simplex, std::span<const double> grad, double lr);

// The same update vectorized over independent 2-point simplices
// (p_plus_j, p_minus_j) with per-pair gradients (+v_j, -v_j); used when every
// weight carries its own two-class distribution.
void md_softmax_step_pair(std::span<double> p_plus, std::span<double> p_minus,
                          std::span<const double> v, double lr);

// Mirror-descent-through-tanh step: the caller evaluates the gradient at
// w = tanh(theta/tau) and the latent update bypasses the inner derivative
// (no s' factor), so it is plain subtraction; tau only shapes the forward.
void md_tanh_step(std::span<const double> theta, std::span<const double> grad_at_w,
                  double lr, double tau, std::span<double> out);
std::vector<double> md_tanh_step(std::span<const double> theta,
                                 std::span<const double> grad_at_w, double lr, double tau);

}  // namespace binquant
