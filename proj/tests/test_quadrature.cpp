#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "mdpdsf/errors.hpp"
#include "mdpdsf/quadrature.hpp"

using namespace mdpdsf;

TEST_CASE("polynomials and Gaussians integrate to their exact values") {
  const auto f = [](double x) {
    QuadVector v;
    v << 1.0, x, x * x, std::exp(-0.5 * x * x), std::cos(x);
    return v;
  };
  const std::vector<double> bp{-3.0, 0.0, 5.0};
  const QuadResult r = integrate_adaptive(f, bp, {});
  CHECK(r.value(0) == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(r.value(1) == doctest::Approx(8.0).epsilon(1e-14));  // (25 - 9) / 2
  CHECK(r.value(2) == doctest::Approx(152.0 / 3.0).epsilon(1e-14));
  const double gauss = std::sqrt(std::numbers::pi / 2.0) * (std::erf(5.0 / std::sqrt(2.0)) + std::erf(3.0 / std::sqrt(2.0)));
  CHECK(std::abs(r.value(3) - gauss) <= 1e-12);
  CHECK(std::abs(r.value(4) - (std::sin(5.0) + std::sin(3.0))) <= 1e-12);
}

TEST_CASE("kinks are resolved by adaptive bisection") {
  const auto f = [](double x) {
    QuadVector v = QuadVector::Zero();
    v(0) = std::abs(x - 0.3);
    v(1) = std::sqrt(std::abs(x));
    return v;
  };
  const std::vector<double> bp{-1.0, 1.0};
  QuadratureConfig cfg;
  cfg.max_subdivisions = 2000;
  const QuadResult r = integrate_adaptive(f, bp, cfg);
  CHECK(std::abs(r.value(0) - (0.5 * 1.3 * 1.3 + 0.5 * 0.7 * 0.7)) <= 1e-10);
  CHECK(std::abs(r.value(1) - 4.0 / 3.0) <= 1e-8);
  CHECK(r.subdivisions > 1);
}

TEST_CASE("exhausting the subdivision budget reports the achieved error") {
  const auto f = [](double x) {
    QuadVector v = QuadVector::Zero();
    v(0) = std::sin(1.0 / (x + 1e-3));
    return v;
  };
  const std::vector<double> bp{0.0, 1.0};
  QuadratureConfig cfg;
  cfg.max_subdivisions = 5;
  try {
    integrate_adaptive(f, bp, cfg);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.achieved_error() > 0.0);
  }
}

TEST_CASE("configuration limits") {
  QuadratureConfig cfg;
  CHECK_NOTHROW(validate_quadrature(cfg));
  cfg.rel_tol = 1e-6;
  CHECK_THROWS_AS(validate_quadrature(cfg), ParameterDomainError);
  cfg = {};
  cfg.window_halfwidth_sigmas = 8.0;
  CHECK_THROWS_AS(validate_quadrature(cfg), ParameterDomainError);
}
