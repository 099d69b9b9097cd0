#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace binquant {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst = 0.0;   // largest observed deviation (property-specific units)
  std::string detail;   // human-readable one-liner
};

// Sharp-regime step rule: the finite difference never exceeds the loss
// gradient in magnitude and never points against it.  Checked exactly (no
// tolerance), including adversarial latents at the flip threshold.
PropertyResult prop_clipping_bound(std::size_t n, std::uint64_t seed);

// Small latents reproduce the gradient (4-ulp identity); steps that move a
// latent away from zero change nothing at all.
PropertyResult prop_identity_and_dead_zone(std::size_t n, std::uint64_t seed);

// Soft binarizer: as beta -> 0 the finite difference approaches the chain
// rule value grad * s'(theta), monotonely up to float noise.
PropertyResult prop_chain_rule_limit(std::size_t n, std::uint64_t seed);

// Energy sandwich: 0 <= E(w_hat) - E(w*) <= beta * grad * (w* - w_hat),
// both sides with tolerance 1e-9; implies the step never ascends.
PropertyResult prop_contrastive_gap(std::size_t n, std::uint64_t seed);

// Closed-form maps against brute-force grid scans.
PropertyResult prop_argmin_matches_grid(std::size_t n, std::uint64_t seed);
PropertyResult prop_prox_matches_grid(std::size_t n, std::uint64_t seed);

// Multiplicative simplex update on (sigmoid(theta), sigmoid(-theta)) with a
// gradient only on the first coordinate reproduces sigmoid(theta - lr*grad)
// to 1e-12.
PropertyResult prop_md_sigmoid_reparametrization(std::size_t n, std::uint64_t seed);

// Paired two-point mirror descent equals the tanh reparametrization
// w <- tanh(atanh(w) - lr*v) to 1e-12.
PropertyResult prop_md_pair_reparametrization(std::size_t n, std::uint64_t seed);

// mu(0) = mu0, mu(epochs_to_max) = 1/alpha (rel 1e-9), non-decreasing, capped.
PropertyResult prop_anneal_schedule();

// Soft-regime rule on the descending interior branch scales the gradient by
// exactly 1/(1+mu) (tolerance 1e-9).
PropertyResult prop_soft_rule_interior_slope(std::size_t n, std::uint64_t seed);

// All of the above with a common per-property sample count.
std::vector<PropertyResult> run_all_properties(std::size_t samples, std::uint64_t seed);

}  // namespace binquant
