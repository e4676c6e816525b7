#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "mdpdsf/efficiency.hpp"
#include "mdpdsf/errors.hpp"
#include "support.hpp"

using namespace mdpdsf;
using testsupport::baseline_sample;

namespace {

// E[exp(-U) | V - U = e] by direct integration over u of exp(-u) phi(e + u) f_U(u).
double conditional_oracle(PseudoFamily fam, const Theta& t, double e) {
  const double hi = fam == PseudoFamily::NE ? 60.0 * t.sigma_u : std::max(t.mu, 0.0) + 40.0 * t.sigma_u;
  const double centre = std::max(0.0, -e);
  const double h = std::min(hi, centre + 40.0 * t.sigma_v) / 400000.0;
  double num = 0.0, den = 0.0;
  for (int k = 0; k <= 400000; ++k) {
    const double u = k * h;
    const double z = (e + u) / t.sigma_v;
    double log_fu = 0.0;
    if (fam == PseudoFamily::NE) {
      log_fu = -u / t.sigma_u;
    } else {
      const double s = (u - t.mu) / t.sigma_u;
      log_fu = -0.5 * s * s;
    }
    const double w = (k == 0 || k == 400000 ? 0.5 : 1.0) * std::exp(-0.5 * z * z + log_fu);
    num += w * std::exp(-u);
    den += w;
  }
  return num / den;
}

}  // namespace

TEST_CASE("Battese-Coelli fixture at e = 0 with unit variances") {
  Theta t;
  t.beta = Eigen::Vector2d(0.0, 0.0);
  t.sigma_v = t.sigma_u = 1.0;
  // 2 Phi(-1/sqrt 2) e^{1/4}, 40-digit arithmetic.
  constexpr double kExact = 0.6156903441929259;
  CHECK(std::abs(te_score(PseudoFamily::NH, t, 0.0) - kExact) <= 1e-13);
  CHECK(std::abs(conditional_oracle(PseudoFamily::NH, t, 0.0) - kExact) <= 1e-9);
  CHECK(te_score(PseudoFamily::NT, t, 0.0) == te_score(PseudoFamily::NH, t, 0.0));
}

TEST_CASE("scores match the conditional-expectation oracle") {
  for (PseudoFamily fam : {PseudoFamily::NT, PseudoFamily::NH, PseudoFamily::NE}) {
    RngStream rng(40 + static_cast<int>(fam), 0);
    for (int i = 0; i < 15; ++i) {
      const Theta t = testsupport::random_theta(fam, 2, rng);
      const double e = (-3.0 + 5.0 * rng.uniform()) * t.sigma();
      CAPTURE(to_string(fam));
      CAPTURE(e);
      CHECK(std::abs(te_score(fam, t, e) - conditional_oracle(fam, t, e)) <= 1e-8);
    }
  }
}

TEST_CASE("te tends to one when sigma_u sits on the floor") {
  Theta t;
  t.beta = Eigen::Vector2d(0.0, 0.0);
  t.sigma_v = 0.8;
  t.sigma_u = kSigmaFloor;
  for (PseudoFamily fam : {PseudoFamily::NH, PseudoFamily::NE})
    for (double e = -3.0; e <= 3.0; e += 0.25) CHECK(te_score(fam, t, e) >= 1.0 - 1e-3);
}

TEST_CASE("te is increasing in the residual and stays in (0, 1]") {
  for (PseudoFamily fam : {PseudoFamily::NT, PseudoFamily::NH, PseudoFamily::NE}) {
    Theta t;
    t.beta = Eigen::Vector2d(1.0, 1.0);
    t.sigma_v = 0.6;
    t.sigma_u = 1.3;
    if (fam == PseudoFamily::NT) t.mu = 0.4;
    double prev = 0.0;
    for (double e = -5.0; e <= 3.0; e += 0.01) {
      const double te = te_score(fam, t, e);
      if (prev > std::numeric_limits<double>::min()) CHECK(te > prev);
      CHECK(te <= 1.0);
      prev = te;
    }
    for (double e : {-1e6, -1e3, 1e3, 1e6}) {
      const double te = te_score(fam, t, e);
      CAPTURE(e);
      CHECK(std::isfinite(te));
      CHECK(te > 0.0);
      CHECK(te <= 1.0);
    }
  }
}

TEST_CASE("technical_efficiency over a fitted sample") {
  const Dataset d = baseline_sample(500, 3);
  FitOptions o;
  const FitResult f = fit_mdpd(d, PseudoFamily::NH, Alpha(0.0), o);
  REQUIRE(f.converged);
  const TEScores s = technical_efficiency(f, d);
  REQUIRE(s.te.size() == d.size());
  CHECK((s.te.array() > 0.0).all());
  CHECK((s.te.array() <= 1.0).all());
  CHECK((s.residuals - (d.y - d.design * f.theta_hat.beta)).norm() <= 1e-12);
  CHECK(s.te(7) == te_score(PseudoFamily::NH, f.theta_hat, s.residuals(7)));

  FitResult stale = f;
  stale.converged = false;
  CHECK_THROWS_AS(technical_efficiency(stale, d), NonConvergenceError);
}

TEST_CASE("MSE of TE scores") {
  TEScores s;
  const Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(5, 0.0, 2.0);
  s.te = (-u.array()).exp();
  CHECK(mse_te(s, u) <= 1e-30);
  s.te.array() += 0.1;
  CHECK(mse_te(s, u) == doctest::Approx(0.01).epsilon(1e-12));

  Eigen::VectorXd partial = u;
  partial(2) = std::numeric_limits<double>::quiet_NaN();
  s.te(2) = 100.0;  // excluded with its NaN truth
  CHECK(mse_te(s, partial) == doctest::Approx(0.01).epsilon(1e-12));

  CHECK_THROWS(mse_te(s, u.head(3)));
  CHECK_THROWS_AS(mse_te(s, Eigen::VectorXd::Constant(5, std::numeric_limits<double>::quiet_NaN())),
                  UndefinedMetricError);
}

TEST_CASE("MLE recovers the true efficiencies on the baseline design") {
  FitOptions o;
  o.compute_covariance = false;
  double total = 0.0;
  const int reps = 30;
  for (int r = 0; r < reps; ++r) {
    const Dataset d = baseline_sample(500, 500 + r);
    total += mse_te(technical_efficiency(fit_mdpd(d, PseudoFamily::NH, Alpha(0.0), o), d), d.true_u);
  }
  CHECK(total / reps == doctest::Approx(0.061).epsilon(0.2));
}
