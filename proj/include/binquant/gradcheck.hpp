#pragma once

#include <cstdint>
#include <string>

namespace binquant {

struct GradcheckReport {
  int seeds = 0;
  std::size_t elements_checked = 0;
  double max_rel = 0.0;
  std::string worst;  // "<net>/<param>[j]" of the largest deviation
  bool passed = false;
  double tolerance = 1e-4;
};

// Backprop vs central differences on small dense and convolutional networks,
// random 64-bit weights and inputs, rel = |bp - fd| / max(1, |bp|, |fd|).
// Draws landing too close to a ReLU kink are redrawn deterministically.
GradcheckReport run_gradcheck(int num_seeds = 50);

}  // namespace binquant
