#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "mdpdsf/alpha_select.hpp"
#include "mdpdsf/errors.hpp"
#include "support.hpp"

using namespace mdpdsf;
using testsupport::firm_sample;
using testsupport::baseline_sample;

namespace {

FitResult line_fit(const Eigen::VectorXd& beta) {
  FitResult f;
  f.frontier = FrontierSpec{true, static_cast<int>(beta.size()) - 1};
  f.theta_hat.beta = beta;
  f.theta_hat.sigma_v = f.theta_hat.sigma_u = 1.0;
  f.converged = true;
  return f;
}

// Box [0,1]^p x [y_lo, y_hi] spanned by a handful of corner rows.
Dataset box(int p, double y_lo, double y_hi) {
  Eigen::MatrixXd x(2, p);
  x.row(0).setZero();
  x.row(1).setOnes();
  return Dataset::from_columns(x, Eigen::Vector2d(y_lo, y_hi));
}

// Share of uniform points in the box that fall between the two planes.
double mc_area(int p, double y_lo, double y_hi, const Eigen::VectorXd& b0, const Eigen::VectorXd& b1) {
  RngStream rng(99, static_cast<std::uint64_t>(p));
  const int draws = 10'000'000;
  long hits = 0;
  Eigen::VectorXd row(p + 1);
  row(0) = 1.0;
  for (int i = 0; i < draws; ++i) {
    for (int d = 0; d < p; ++d) row(d + 1) = rng.uniform();
    const double y = y_lo + (y_hi - y_lo) * rng.uniform();
    const double g0 = b0.dot(row), g1 = b1.dot(row);
    if (y >= std::min(g0, g1) && y <= std::max(g0, g1)) ++hits;
  }
  return static_cast<double>(hits) / draws;
}

}  // namespace

TEST_CASE("similarity index geometry") {
  const Dataset d = box(1, 0.0, 10.0);
  const FitResult a = line_fit(Eigen::Vector2d(3.0, 0.0));
  CHECK(similarity_index(d, a, a) == 0.0);
  CHECK(similarity_index(d, a, line_fit(Eigen::Vector2d(5.0, 0.0))) == doctest::Approx(0.2).epsilon(1e-12));
  // Clipped at the bottom of the box.
  CHECK(similarity_index(d, line_fit(Eigen::Vector2d(-1.0, 0.0)), line_fit(Eigen::Vector2d(5.0, 0.0))) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(similarity_index(d, a, line_fit(Eigen::Vector3d(1.0, 0.0, 0.0))), ParameterDomainError);
}

TEST_CASE("crossing lines match a Monte Carlo area oracle") {
  const Dataset d = box(1, 1.0, 9.0);
  const Eigen::Vector2d b0(2.0, 6.0), b1(6.0, -2.0);
  const double s = similarity_index(d, line_fit(b0), line_fit(b1));
  CHECK(std::abs(s - mc_area(1, 1.0, 9.0, b0, b1)) <= 1e-3);
  CHECK(s == doctest::Approx(similarity_index(d, line_fit(b1), line_fit(b0))).epsilon(1e-15));

  // One line leaves the box through both edges.
  const Eigen::Vector2d c0(-2.0, 12.0), c1(5.0, 0.0);
  CHECK(std::abs(similarity_index(d, line_fit(c0), line_fit(c1)) - mc_area(1, 1.0, 9.0, c0, c1)) <= 1e-3);
}

TEST_CASE("crossing planes over two inputs") {
  const Dataset d = box(2, 0.0, 6.0);
  const Eigen::Vector3d b0(1.0, 3.0, 1.0), b1(4.0, -1.0, 0.5);
  const double s = similarity_index(d, line_fit(b0), line_fit(b1));
  CHECK(std::abs(s - mc_area(2, 0.0, 6.0, b0, b1)) <= 1e-3);
  CHECK(s >= 0.0);
  CHECK(s <= 1.0);
}

TEST_CASE("mcs_test definitions") {
  const Dataset d = baseline_sample(300, 4);
  FitOptions o;
  const FitResult f0 = fit_mdpd(d, PseudoFamily::NH, Alpha(0.0), o);
  CHECK_THROWS_AS(mcs_test(d, PseudoFamily::NH, f0, Alpha(0.5), 1, 3), ParameterDomainError);

  const McsResult two = mcs_test(d, PseudoFamily::NH, f0, Alpha(0.5), 2, 3);
  REQUIRE(two.sim_bootstrap.size() == 1);
  CHECK(two.accept == (two.sim_observed <= two.sim_bootstrap[0]));

  const McsResult a = mcs_test(d, PseudoFamily::NH, f0, Alpha(0.5), 20, 11);
  const McsResult b = mcs_test(d, PseudoFamily::NH, f0, Alpha(0.5), 20, 11);
  CHECK(a.sim_bootstrap == b.sim_bootstrap);
  CHECK(a.sim_observed == b.sim_observed);
  CHECK(a.accept == b.accept);
  REQUIRE(a.sim_bootstrap.size() == 19);
  CHECK(a.sim_bootstrap_max == *std::max_element(a.sim_bootstrap.begin(), a.sim_bootstrap.end()));
  CHECK(a.accept == (a.sim_observed <= a.sim_bootstrap_max));
  for (double s : a.sim_bootstrap) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }

  FitResult stale = f0;
  stale.converged = false;
  CHECK_THROWS_AS(mcs_test(d, PseudoFamily::NH, stale, Alpha(0.5), 5, 3), NonConvergenceError);
}

TEST_CASE("clean data: ML and alpha = 0.5 agree") {
  const Dataset d = baseline_sample(500, 21);
  const FitResult f0 = fit_mdpd(d, PseudoFamily::NH, Alpha(0.0), {});
  const McsResult r = mcs_test(d, PseudoFamily::NH, f0, Alpha(0.5), 99, 5);
  CHECK(r.accept);
}

TEST_CASE("contaminated firm data: ML is rejected, a robust alpha is selected") {
  const Dataset d = firm_sample(100);
  const AlphaSelection sel = select_alpha(d, PseudoFamily::NH, Alpha(0.5), default_alpha_grid(), 99, 1000);
  REQUIRE_FALSE(sel.steps.empty());
  CHECK_FALSE(sel.steps[0].accept);
  CHECK(sel.steps[0].sim_observed > sel.steps[0].sim_bootstrap_max);
  CHECK(sel.alpha.value() >= 0.2);
  CHECK(sel.steps.back().accept != sel.exhausted);

  // Nothing between 0 and alpha_star: rejection exhausts the grid.
  const AlphaSelection trivial = select_alpha(d, PseudoFamily::NH, Alpha(0.5), {Alpha(0.5)}, 99, 1000);
  CHECK(trivial.exhausted);
  CHECK(trivial.alpha == Alpha(0.5));
  CHECK(trivial.steps.size() == 1);
}

TEST_CASE("select_alpha argument checks") {
  const Dataset d = baseline_sample(100, 3);
  CHECK_THROWS_AS(select_alpha(d, PseudoFamily::NH, Alpha(0.5), {Alpha(0.0), Alpha(0.3)}, 9, 1),
                  ParameterDomainError);
  CHECK_THROWS_AS(select_alpha(d, PseudoFamily::NH, Alpha(0.5), {Alpha(0.3), Alpha(0.1), Alpha(0.5)}, 9, 1),
                  ParameterDomainError);
}
