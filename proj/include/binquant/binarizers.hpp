#pragma once

#include <span>
#include <vector>

#include "binquant/common.hpp"

namespace binquant {

enum class BinKind { Tanh, HardTanh, DoubleWell };

// Choice and hyper-parameters of the latent-to-weight mapping.
// tau applies to Tanh/HardTanh, (mu, alpha) to DoubleWell.
struct BinarizerSpec {
  BinKind kind = BinKind::DoubleWell;
  double tau = 1.0;
  double mu = 100.0;
  double alpha = 0.01;

  void validate() const;  // throws ConfigError
  // mu*alpha >= 1 makes the double-well mapping an exact sign function.
  bool hard() const { return mu * alpha >= 1.0; }
};

// w = s(theta), element-wise:
//   Tanh       tanh(theta/tau)
//   HardTanh   clip(theta/tau, [-1,1])
//   DoubleWell clip((theta + mu*(1+alpha)*sgn(theta)) / (1+mu), [-1,1])
double forward_map_scalar(double theta, const BinarizerSpec& spec);
void forward_map(std::span<const double> theta, const BinarizerSpec& spec,
                 std::span<double> out);  // out may alias theta
std::vector<double> forward_map(std::span<const double> theta, const BinarizerSpec& spec);

// s(theta - beta .* grad): the linear perturbation absorbed into the latent,
// then the ordinary forward map.  No separate code path by construction.
double perturbed_map_scalar(double theta, double beta, double grad, const BinarizerSpec& spec);
void perturbed_map(std::span<const double> theta, std::span<const double> beta,
                   std::span<const double> grad, const BinarizerSpec& spec,
                   std::span<double> out);
std::vector<double> perturbed_map(std::span<const double> theta, std::span<const double> beta,
                                  std::span<const double> grad, const BinarizerSpec& spec);

// The per-element inner objective whose arg-min over w in [-1,1] is the
// forward map above:
//   DoubleWell (1+mu)/2 w^2 - w theta - mu(1+alpha)|w|
//   Tanh       tau*[u ln u + (1-u) ln(1-u)] - w theta, u = (1-w)/2
//              (boundary w = +-1 via the u ln u -> 0 limit, value -w theta)
//   HardTanh   tau/2 w^2 - w theta
// w outside [-1,1] is a domain error; the interval constraint is a
// precondition here and clipping in the maps, never an infinite value.
double inner_energy(double w, double theta, const BinarizerSpec& spec);

// Proximal operator of lambda * min{|.-1|, |.+1|}: pull each element lambda
// toward its nearest binary target (sgn(theta), sgn(0)=+1), saturating there.
double prox_w_shape_scalar(double theta, double lambda);
void prox_w_shape(std::span<const double> theta, double lambda, std::span<double> out);
std::vector<double> prox_w_shape(std::span<const double> theta, double lambda);

// Numerically stable soft-arg-max (max-subtraction); output sums to 1.
void softargmax(std::span<const double> u, std::span<double> out);
std::vector<double> softargmax(std::span<const double> u);

}  // namespace binquant
