#pragma once

#include <functional>
#include <span>
#include <vector>

#include "binquant/binarizers.hpp"
#include "binquant/data.hpp"

namespace binquant {

// Brute-force references the tests compare the closed forms against.
// Everything here runs in 64-bit no matter what the network core uses.

struct GridSpec {
  double lo = -1.0;
  double hi = 1.0;
  long points = 10000;
};

struct ArgminResult {
  double w_min;
  double e_min;
};

// Exhaustive scan of inner_energy over the grid; ties break toward smaller w
// (ascending scan keeps the first strict minimum), so outputs are deterministic.
ArgminResult grid_argmin_energy(double theta, const BinarizerSpec& spec,
                                const GridSpec& grid = {-1.0, 1.0, 10000});

// Brute-force minimizer of lambda*min{|w-1|,|w+1|} + (w-theta)^2/2.
double grid_prox(double theta, double lambda, const GridSpec& grid = {-3.0, 3.0, 100000});

// Central differences per coordinate, 64-bit.
std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                std::span<const double> params, double step = 1e-5);

// Multiclass perceptron; true iff it converges (a full error-free pass)
// within max_passes sweeps.
bool perceptron_separable(const Dataset& ds, long max_passes = 10000);

}  // namespace binquant
