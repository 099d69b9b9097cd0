#include "binquant/oracles.hpp"

#include <cmath>

namespace binquant {

ArgminResult grid_argmin_energy(double theta, const BinarizerSpec& spec,
                                const GridSpec& grid) {
  if (!(grid.lo < grid.hi) || grid.points < 2)
    throw ConfigError("grid_argmin_energy: bad grid");
  double wbest = grid.lo;
  double ebest = inner_energy(grid.lo, theta, spec);
  for (long i = 1; i < grid.points; ++i) {
    // Endpoint-exact blend: i = points-1 lands exactly on hi, so the domain
    // precondition of inner_energy is never tripped by rounding.
    double w = (grid.lo * double(grid.points - 1 - i) + grid.hi * double(i)) /
               double(grid.points - 1);
    double e = inner_energy(w, theta, spec);
    if (e < ebest) {
      ebest = e;
      wbest = w;
    }
  }
  return {wbest, ebest};
}

double grid_prox(double theta, double lambda, const GridSpec& grid) {
  if (!(grid.lo < grid.hi) || grid.points < 2) throw ConfigError("grid_prox: bad grid");
  auto objective = [&](double w) {
    double phi = std::min(std::abs(w - 1.0), std::abs(w + 1.0));
    double d = w - theta;
    return lambda * phi + 0.5 * d * d;
  };
  double wbest = grid.lo;
  double ebest = objective(grid.lo);
  for (long i = 1; i < grid.points; ++i) {
    double w = (grid.lo * double(grid.points - 1 - i) + grid.hi * double(i)) /
               double(grid.points - 1);
    double e = objective(w);
    if (e < ebest) {
      ebest = e;
      wbest = w;
    }
  }
  return wbest;
}

std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                std::span<const double> params, double step) {
  std::vector<double> p(params.begin(), params.end());
  std::vector<double> g(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    double saved = p[j];
    p[j] = saved + step;
    double fp = f(p);
    p[j] = saved - step;
    double fm = f(p);
    p[j] = saved;
    g[j] = (fp - fm) / (2.0 * step);
  }
  return g;
}

bool perceptron_separable(const Dataset& ds, long max_passes) {
  const std::size_t n = ds.n, d = ds.dim;
  const int k = ds.num_classes;
  // One linear score per class with a bias column; update on every mistake.
  std::vector<double> w(std::size_t(k) * (d + 1), 0.0);
  for (long pass = 0; pass < max_passes; ++pass) {
    bool clean = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double* x = ds.images.data() + i * d;
      int best = 0;
      double bestscore = 0.0;
      for (int c = 0; c < k; ++c) {
        const double* wc = w.data() + std::size_t(c) * (d + 1);
        double s = wc[d];
        for (std::size_t j = 0; j < d; ++j) s += wc[j] * x[j];
        if (c == 0 || s > bestscore) {
          bestscore = s;
          best = c;
        }
      }
      int y = ds.labels[i];
      if (best != y) {
        clean = false;
        double* wy = w.data() + std::size_t(y) * (d + 1);
        double* wb = w.data() + std::size_t(best) * (d + 1);
        for (std::size_t j = 0; j < d; ++j) {
          wy[j] += x[j];
          wb[j] -= x[j];
        }
        wy[d] += 1.0;
        wb[d] -= 1.0;
      }
    }
    if (clean) return true;
  }
  return false;
}

}  // namespace binquant
