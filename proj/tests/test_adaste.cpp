#include <doctest.h>

#include <cmath>
#include <vector>

#include "binquant/adaste.hpp"
#include "binquant/binarizers.hpp"
#include "binquant/common.hpp"

using namespace binquant;

namespace {

BinarizerSpec dw(double mu, double alpha = 0.01) {
  BinarizerSpec s;
  s.kind = BinKind::DoubleWell;
  s.mu = mu;
  s.alpha = alpha;
  return s;
}

}  // namespace

TEST_CASE("hard beta rule: pinned values") {
  // Active branch, small latent: max{2, |theta|(1+eps)} = 2.
  CHECK(choose_beta_hard_scalar(0.5, 0.25) == 8.0);
  // Dead zone (latent and gradient disagree): beta = 1.
  CHECK(choose_beta_hard_scalar(3.0, -1.0) == 1.0);
  CHECK(choose_beta_hard_scalar(-3.0, 1.0) == 1.0);
  // Zero gradient never counts as active.
  CHECK(choose_beta_hard_scalar(0.7, 0.0) == 1.0);
  // Active branch, large latent: the flip guard inflates |theta|.
  CHECK(choose_beta_hard_scalar(-4.0, -0.5) == 8.0 * (1.0 + kEpsFlip));
}

TEST_CASE("hard beta rule: active steps always cross the sign kink") {
  auto rng = make_rng(101);
  BinarizerSpec sharp = dw(100.0);
  for (int i = 0; i < 20000; ++i) {
    double theta = next_normal(rng) * 2.0;
    double grad = next_normal(rng);
    double beta = choose_beta_hard_scalar(theta, grad);
    CHECK(beta > 0.0);
    if (sgn(theta) * grad > 0.0) {
      // The perturbed latent must land strictly on the other side.
      CHECK(sgn(theta - beta * grad) == -sgn(theta));
      // And the finite difference stays within the loss gradient.
      double g = effective_gradient_scalar(theta, grad, beta, sharp);
      CHECK(std::abs(g) <= std::abs(grad));
      CHECK(g * grad >= 0.0);
    } else {
      CHECK(beta == 1.0);
      CHECK(effective_gradient_scalar(theta, grad, beta, sharp) == 0.0);
    }
  }
}

TEST_CASE("hard beta rule: vector form matches the scalar form") {
  auto rng = make_rng(103);
  std::vector<double> theta(333), grad(333);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    theta[i] = next_normal(rng) * 2.0;
    grad[i] = next_normal(rng);
  }
  std::vector<double> beta = choose_beta_hard(theta, grad);
  REQUIRE(beta.size() == theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i)
    CHECK(beta[i] == choose_beta_hard_scalar(theta[i], grad[i]));
}

TEST_CASE("soft beta rule: pinned values (mu=1, alpha=0.01)") {
  BinarizerSpec s = dw(1.0, 0.01);
  // Descending side: beta = min{beta_max, (theta + 1 - mu*alpha)/grad}.
  double beta = choose_beta_soft_scalar(-0.5, 1.0, s, 100.0);
  CHECK(beta == doctest::Approx(0.49).epsilon(1e-15));
  // The resulting finite difference is the interior slope grad/(1+mu).
  CHECK(effective_gradient_scalar(-0.5, 1.0, beta, s) ==
        doctest::Approx(0.5).epsilon(1e-12));
  // Ascending side: the kink-crossing choice beta = (theta/grad)(1+eps).
  CHECK(choose_beta_soft_scalar(-0.5, -0.25, s, 100.0) == 2.0 * (1.0 + kEpsFlip));
  // Zero gradient: beta = 1.
  CHECK(choose_beta_soft_scalar(0.3, 0.0, s, 100.0) == 1.0);
}

TEST_CASE("soft beta rule: rejects the sharp regime and bad beta_max") {
  // Validation lives on the array form; the scalar helper is the unchecked
  // inner kernel.
  std::vector<double> theta{0.1}, grad{0.2};
  CHECK_THROWS_AS(choose_beta_soft(theta, grad, dw(100.0, 0.01), 100.0), ConfigError);
  CHECK_THROWS_AS(choose_beta_soft(theta, grad, dw(1.0, 0.01), 0.0), ConfigError);
}

TEST_CASE("soft beta rule: beta_max caps the descending branch") {
  BinarizerSpec s = dw(1.0, 0.01);
  // Unconstrained value would be (0.5 + 0.99)/0.001 = 1490; cap wins.
  CHECK(choose_beta_soft_scalar(-0.5, 0.001, s, 7.0) == 7.0);
}

TEST_CASE("effective gradient: pinned values") {
  BinarizerSpec sharp = dw(100.0);
  // (s(0.5) - s(0.5 - 8*0.25)) / 8 = (1 - (-1))/8 = 0.25, exactly the gradient.
  CHECK(effective_gradient_scalar(0.5, 0.25, 8.0, sharp) == 0.25);
  // Dead zone: the step moves the latent away from the kink, nothing flips.
  CHECK(effective_gradient_scalar(-1.0, 0.5, 1.0, sharp) == 0.0);
  // Soft map: small beta recovers the chain rule through tanh.
  BinarizerSpec t;
  t.kind = BinKind::Tanh;
  double g = effective_gradient_scalar(0.0, 1.0, 1e-4, t);
  CHECK(std::abs(g - 1.0) < 1e-6);
}

TEST_CASE("effective gradient rejects non-positive beta") {
  std::vector<double> th = {0.1}, gr = {0.2}, be = {0.0}, out(1);
  CHECK_THROWS_AS(effective_gradient(th, gr, be, dw(100.0), out),
                  std::invalid_argument);
}

TEST_CASE("adaste step: pinned single-element trajectories") {
  BinarizerSpec sharp = dw(100.0);
  AdaSteState st = make_adaste_state({{0.5}}, sharp);
  adaste_step(st, {{0.25}}, /*lr=*/0.1, /*momentum=*/0.0);
  CHECK(st.theta[0][0] == doctest::Approx(0.475).epsilon(1e-15));
  CHECK(st.step_count == 1);

  // Zero gradient leaves the latent untouched.
  AdaSteState st2 = make_adaste_state({{0.5}}, sharp);
  adaste_step(st2, {{0.0}}, 0.1, 0.0);
  CHECK(st2.theta[0][0] == 0.5);

  // Momentum recursion: second step moves by lr*g*(1 + momentum).
  AdaSteState st3 = make_adaste_state({{0.5}}, sharp);
  adaste_step(st3, {{0.25}}, 0.1, 0.9);
  double after1 = st3.theta[0][0];
  CHECK(after1 == doctest::Approx(0.475).epsilon(1e-15));
  adaste_step(st3, {{0.25}}, 0.1, 0.9);
  double delta2 = after1 - st3.theta[0][0];
  CHECK(delta2 == doctest::Approx(0.1 * 0.25 * 1.9).epsilon(1e-12));
  CHECK(st3.step_count == 2);
}

TEST_CASE("adaste step: dead-zone elements keep even their momentum untouched") {
  BinarizerSpec sharp = dw(100.0);
  AdaSteState st = make_adaste_state({{-1.0, 0.5}}, sharp);
  adaste_step(st, {{0.5, 0.25}}, 0.1, 0.9);
  CHECK(st.theta[0][0] == -1.0);  // sgn(theta)*grad < 0: effective gradient 0
  CHECK(st.momentum_buf[0][0] == 0.0);
  CHECK(st.theta[0][1] == doctest::Approx(0.475));
}

TEST_CASE("adaste step: multiple tensors and shape mismatch") {
  BinarizerSpec sharp = dw(100.0);
  AdaSteState st = make_adaste_state({{0.5, -0.5}, {1.5}}, sharp);
  adaste_step(st, {{0.25, -0.25}, {1.0}}, 0.1, 0.0);
  CHECK(st.theta[0][0] == doctest::Approx(0.475));
  CHECK(st.theta[0][1] == doctest::Approx(-0.475));
  // |theta| = 1.5 < 2 so the active step still equals lr*grad.
  CHECK(st.theta[1][0] == doctest::Approx(1.4).epsilon(1e-12));

  AdaSteState st2 = make_adaste_state({{0.5}}, sharp);
  CHECK_THROWS_AS(adaste_step(st2, {{0.1, 0.2}}, 0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(adaste_step(st2, {{0.1}}, -1.0, 0.0), ConfigError);
}

TEST_CASE("anneal schedule: pinned values") {
  AnnealSchedule s;
  s.mu0 = 1.0;
  s.alpha = 0.01;
  s.epochs_to_max = 200;
  CHECK_NOTHROW(s.validate());
  CHECK(s.gamma() == doctest::Approx(std::pow(100.0, 1.0 / 200.0)).epsilon(1e-15));
  CHECK(anneal_mu(s, 0) == 1.0);
  CHECK(anneal_mu(s, 1) == doctest::Approx(1.0232929922807541).epsilon(1e-12));
  // Saturation is exact, not "within one ulp of": the cap is returned as-is.
  CHECK(anneal_mu(s, 200) == 100.0);
  CHECK(anneal_mu(s, 500) == 100.0);
}

TEST_CASE("anneal schedule: monotone, capped, validated") {
  AnnealSchedule s;
  s.mu0 = 2.0;
  s.alpha = 0.02;
  s.epochs_to_max = 37;
  double prev = 0.0;
  for (long e = 0; e <= 120; ++e) {
    double mu = anneal_mu(s, e);
    CHECK(mu >= prev);
    CHECK(mu <= 1.0 / s.alpha + 1e-12);
    prev = mu;
  }
  CHECK(anneal_mu(s, 37) == 50.0);

  AnnealSchedule bad = s;
  bad.mu0 = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.alpha = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.epochs_to_max = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.mu0 = 51.0;  // above 1/alpha
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(anneal_mu(s, -1), std::invalid_argument);
}
