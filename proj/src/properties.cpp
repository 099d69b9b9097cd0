#include "binquant/properties.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "binquant/adaste.hpp"
#include "binquant/baselines.hpp"
#include "binquant/binarizers.hpp"
#include "binquant/common.hpp"
#include "binquant/oracles.hpp"

namespace binquant {

namespace {

BinarizerSpec sharp_spec() {
  BinarizerSpec s;
  s.kind = BinKind::DoubleWell;
  s.mu = 100.0;
  s.alpha = 0.01;
  return s;
}

double ulp_at(double x) { return std::nextafter(std::abs(x), HUGE_VAL) - std::abs(x); }

void finish(PropertyResult& r) {
  r.passed = (r.violations == 0);
  if (r.detail.empty())
    r.detail = r.passed ? ("worst " + std::to_string(r.worst))
                        : (std::to_string(r.violations) + " violations, worst " +
                           std::to_string(r.worst));
}

}  // namespace

PropertyResult prop_clipping_bound(std::size_t n, std::uint64_t seed) {
  PropertyResult r;
  r.name = "clipping-bound";
  BinarizerSpec spec = sharp_spec();
  std::mt19937_64 rng = make_rng(mix64(seed ^ 0x1111));

  auto check = [&](double theta, double grad) {
    double beta = choose_beta_hard_scalar(theta, grad);
    double g = effective_gradient_scalar(theta, grad, beta, spec);
    ++r.samples;
    bool bad = !(beta > 0.0) || !std::isfinite(beta) || !std::isfinite(g) ||
               std::abs(g) > std::abs(grad) || g * grad < 0.0;
    if (bad) ++r.violations;
    r.worst = std::max(r.worst, std::abs(g) - std::abs(grad));
  };

  for (std::size_t i = 0; i < n; ++i)
    check(2.0 * next_normal(rng), next_normal(rng));

  const double thr = 2.0 / (1.0 + kEpsFlip);
  const double adv_theta[] = {0.0, thr, -thr, 2.0, -2.0, 4.0, -4.0};
  const double adv_grad[] = {0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 1e-8, -1e-8};
  for (double t : adv_theta)
    for (double g : adv_grad) check(t, g);
  finish(r);
  return r;
}

PropertyResult prop_identity_and_dead_zone(std::size_t n, std::uint64_t seed) {
  PropertyResult r;
  r.name = "identity-and-dead-zone";
  BinarizerSpec spec = sharp_spec();
  std::mt19937_64 rng = make_rng(mix64(seed ^ 0x2222));

  auto check = [&](double theta, double grad) {
    double beta = choose_beta_hard_scalar(theta, grad);
    double g = effective_gradient_scalar(theta, grad, beta, spec);
    ++r.samples;
    if (sgn(theta) * grad > 0.0) {
      // step toward the sign flip: a rescaled copy of the loss gradient
      double expected = 2.0 * grad / std::max(2.0, std::abs(theta) * (1.0 + kEpsFlip));
      double err = std::abs(g - expected);
      double ulp = ulp_at(expected);
      if (err > 4.0 * ulp) ++r.violations;
      r.worst = std::max(r.worst, ulp > 0 ? err / ulp : 0.0);
    } else {
      // step away from the flip (or zero gradient): exactly zero
      if (g != 0.0) ++r.violations;
    }
  };

  for (std::size_t i = 0; i < n; ++i)
    check(2.0 * next_normal(rng), next_normal(rng));

  const double thr = 2.0 / (1.0 + kEpsFlip);
  const double adv_theta[] = {0.0, thr, -thr, 2.0, -2.0, 4.0, -4.0};
  const double adv_grad[] = {0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 1e-8, -1e-8};
  for (double t : adv_theta)
    for (double g : adv_grad) check(t, g);

  finish(r);
  r.detail = (r.passed ? std::string() : std::to_string(r.violations) + " violations; ") +
             "worst identity error " + std::to_string(r.worst) + " ulp";
  return r;
}

PropertyResult prop_chain_rule_limit(std::size_t n, std::uint64_t seed) {
  PropertyResult r;
  r.name = "chain-rule-limit";
  BinarizerSpec spec;
  spec.kind = BinKind::Tanh;
  spec.tau = 1.0;
  std::mt19937_64 rng = make_rng(mix64(seed ^ 0x3333));

  for (std::size_t i = 0; i < n; ++i) {
    double theta = 1.5 * next_normal(rng);
    double grad = next_normal(rng);
    if (std::abs(grad) < 1e-12) grad = 1e-3;
    double t = std::tanh(theta / spec.tau);
    double limit = grad * (1.0 - t * t) / spec.tau;

    double prev_err = HUGE_VAL;
    bool bad = false;
    double err = 0.0;
    for (double beta : {1e-2, 1e-4, 1e-6}) {
      double g = effective_gradient_scalar(theta, grad, beta, spec);
      err = std::abs(g - limit);
      // division by beta amplifies the fixed absolute float noise, hence the
      // beta-dependent allowance on the monotone decrease
      double allow = 1e-15 / beta + 1e-12;
      if (err > prev_err + allow) bad = true;
      prev_err = err;
    }
    double final_tol = 1e-4 * (1.0 + std::abs(limit));
    if (err > final_tol) bad = true;
    ++r.samples;
    if (bad) ++r.violations;
    r.worst = std::max(r.worst, err / final_tol);
  }
  finish(r);
  return r;
}

PropertyResult prop_contrastive_gap(std::size_t n, std::uint64_t seed) {
  PropertyResult r;
  r.name = "contrastive-gap";
  std::mt19937_64 rng = make_rng(mix64(seed ^ 0x4444));
  const double tol = 1e-9;

  for (std::size_t i = 0; i < n; ++i) {
    BinarizerSpec spec;
    switch (i % 4) {
      case 0:
        spec = sharp_spec();
        break;
      case 1:
        spec.kind = BinKind::Tanh;
        spec.tau = 1.0;
        break;
      case 2:
        spec.kind = BinKind::HardTanh;
        spec.tau = 1.0;
        break;
      default:
        spec.kind = BinKind::DoubleWell;
        spec.mu = 10.0;
        spec.alpha = 0.01;  // soft regime
        break;
    }
    double theta = 2.0 * next_normal(rng);
    double grad = next_normal(rng);
    double beta = std::pow(10.0, next_uniform(rng, -3.0, 3.0));
    double ws = forward_map_scalar(theta, spec);
    double wh = perturbed_map_scalar(theta, beta, grad, spec);
    double gap = inner_energy(wh, theta, spec) - inner_energy(ws, theta, spec);
    double rhs = beta * grad * (ws - wh);
    ++r.samples;
    if (gap < -tol || gap > rhs + tol) ++r.violations;
    r.worst = std::max({r.worst, -gap, gap - rhs});
  }
  finish(r);
  return r;
}

PropertyResult prop_argmin_matches_grid(std::size_t n, std::uint64_t seed) {
  PropertyResult r;
  r.name = "argmin-matches-grid";
  std::mt19937_64 rng = make_rng(mix64(seed ^ 0x5555));
  GridSpec grid{-1.0, 1.0, 10000};
  const double step = (grid.hi - grid.lo) / double(grid.points - 1);

  for (std::size_t i = 0; i < n; ++i) {
    BinarizerSpec spec;
    switch (i % 3) {
      case 0:
        spec = sharp_spec();
        break;
      case 1:
        spec.kind = BinKind::Tanh;
        spec.tau = next_uniform(rng, 0.5, 2.0);
        break;
      default:
        spec.kind = BinKind::HardTanh;
        spec.tau = next_uniform(rng, 0.5, 2.0);
        break;
    }
    double theta = 2.0 * next_normal(rng);
    if (theta == 0.0) theta = 0.25;  // grid ties at the origin are sign-convention
    double w = forward_map_scalar(theta, spec);
    ArgminResult o = grid_argmin_energy(theta, spec, grid);
    double err = std::abs(w - o.w_min);
    ++r.samples;
    if (err > step + 1e-9) ++r.violations;
    r.worst = std::max(r.worst, err);
  }
  finish(r);
  return r;
}

PropertyResult prop_prox_matches_grid(std::size_t n, std::uint64_t seed) {
  PropertyResult r;
  r.name = "prox-matches-grid";
  std::mt19937_64 rng = make_rng(mix64(seed ^ 0x6666));
  GridSpec grid{-3.0, 3.0, 100000};
  const double step = (grid.hi - grid.lo) / double(grid.points - 1);

  for (std::size_t i = 0; i < n; ++i) {
    double theta = next_uniform(rng, -2.5, 2.5);
    if (theta == 0.0) theta = 0.125;  // the tie between -lambda and +lambda
    double lambda = next_uniform(rng, 0.0, 1.0);
    double p = prox_w_shape_scalar(theta, lambda);
    double o = grid_prox(theta, lambda, grid);
    double err = std::abs(p - o);
    ++r.samples;
    if (err > step + 1e-9) ++r.violations;
    r.worst = std::max(r.worst, err);
  }
  finish(r);
  return r;
}

PropertyResult prop_md_sigmoid_reparametrization(std::size_t n, std::uint64_t seed) {
  PropertyResult r;
  r.name = "md-sigmoid-reparametrization";
  std::mt19937_64 rng = make_rng(mix64(seed ^ 0x9999));
  const double tol = 1e-12;
  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };

  for (std::size_t i = 0; i < n; ++i) {
    double theta = 2.0 * next_normal(rng);
    double grad = next_normal(rng);
    double lr = next_uniform(rng, 0.01, 1.0);
    double w[2] = {sigmoid(theta), sigmoid(-theta)};
    double g[2] = {grad, 0.0};
    md_softmax_step(std::span<double>(w, 2), std::span<const double>(g, 2), lr);
    double err = std::abs(w[0] - sigmoid(theta - lr * grad));
    ++r.samples;
    if (err > tol) ++r.violations;
    r.worst = std::max(r.worst, err);
  }
  finish(r);
  return r;
}

PropertyResult prop_md_pair_reparametrization(std::size_t n, std::uint64_t seed) {
  PropertyResult r;
  r.name = "md-pair-reparametrization";
  std::mt19937_64 rng = make_rng(mix64(seed ^ 0x7777));
  const double tol = 1e-12;

  for (std::size_t i = 0; i < n; ++i) {
    double w = next_uniform(rng, -0.999, 0.999);
    double v = next_normal(rng);
    double lr = next_uniform(rng, 0.01, 1.0);
    double pp = (1.0 + w) / 2.0, pm = 1.0 - pp;
    md_softmax_step_pair(std::span<double>(&pp, 1), std::span<double>(&pm, 1),
                         std::span<const double>(&v, 1), lr);
    double got = pp - pm;
    double ref = std::tanh(std::atanh(w) - lr * v);
    double err = std::abs(got - ref);
    ++r.samples;
    if (err > tol) ++r.violations;
    r.worst = std::max(r.worst, err);
  }
  finish(r);
  return r;
}

PropertyResult prop_anneal_schedule() {
  PropertyResult r;
  r.name = "anneal-schedule";
  AnnealSchedule s;
  s.mu0 = 1.0;
  s.alpha = 0.01;
  s.epochs_to_max = 200;
  s.validate();

  double prev = -HUGE_VAL;
  bool bad = false;
  for (long e = 0; e <= 500; ++e) {
    double mu = anneal_mu(s, e);
    ++r.samples;
    if (mu > 100.0 || mu < prev - 1e-12) bad = true;
    prev = mu;
  }
  double mu0 = anneal_mu(s, 0);
  double mu_end = anneal_mu(s, 200);
  if (mu0 != 1.0) bad = true;
  if (std::abs(mu_end - 100.0) > 1e-9 * 100.0) bad = true;
  if (bad) ++r.violations;
  r.worst = std::abs(mu_end - 100.0);
  r.detail = "mu(0)=" + std::to_string(mu0) + " mu(200)=" + std::to_string(mu_end);
  finish(r);
  return r;
}

PropertyResult prop_soft_rule_interior_slope(std::size_t n, std::uint64_t seed) {
  PropertyResult r;
  r.name = "soft-rule-interior-slope";
  std::mt19937_64 rng = make_rng(mix64(seed ^ 0x8888));
  const double tol = 1e-9;

  for (std::size_t i = 0; i < n; ++i) {
    BinarizerSpec spec;
    spec.kind = BinKind::DoubleWell;
    spec.mu = next_uniform(rng, 0.5, 10.0);
    spec.alpha = 0.01;
    double ma = spec.mu * spec.alpha;
    double theta = next_uniform(rng, -1.0 + ma + 0.01, -0.01);
    double grad = next_uniform(rng, 0.1, 2.0);
    if (i % 2 == 1) {  // mirrored branch
      theta = -theta;
      grad = -grad;
    }
    double beta = choose_beta_soft_scalar(theta, grad, spec, 1e6);
    double g = effective_gradient_scalar(theta, grad, beta, spec);
    double expected = grad / (1.0 + spec.mu);
    double err = std::abs(g - expected);
    ++r.samples;
    if (err > tol) ++r.violations;
    r.worst = std::max(r.worst, err);
  }
  finish(r);
  return r;
}

std::vector<PropertyResult> run_all_properties(std::size_t samples, std::uint64_t seed) {
  std::vector<PropertyResult> out;
  out.push_back(prop_clipping_bound(samples, seed));
  out.push_back(prop_identity_and_dead_zone(samples, seed));
  out.push_back(prop_chain_rule_limit(samples, seed));
  out.push_back(prop_contrastive_gap(samples, seed));
  out.push_back(prop_argmin_matches_grid(std::min<std::size_t>(samples, 2000), seed));
  out.push_back(prop_prox_matches_grid(std::min<std::size_t>(samples, 2000), seed));
  out.push_back(prop_md_sigmoid_reparametrization(samples, seed));
  out.push_back(prop_md_pair_reparametrization(samples, seed));
  out.push_back(prop_anneal_schedule());
  out.push_back(prop_soft_rule_interior_slope(samples, seed));
  return out;
}

}  // namespace binquant
