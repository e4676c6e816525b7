#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>

namespace mdpdsf {

struct QuadratureConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double window_halfwidth_sigmas = 12.0;
  int max_subdivisions = 200;
};

/// Throws ParameterDomainError if rel_tol > 1e-8 or the window is narrower
/// than 10 scale units.
void validate_quadrature(const QuadratureConfig& config);

/// Up to five integrands sharing one subdivision.
using QuadVector = Eigen::Matrix<double, 5, 1>;

struct QuadResult {
  QuadVector value = QuadVector::Zero();
  QuadVector error = QuadVector::Zero();
  int subdivisions = 0;
};

/// Adaptive Gauss-Kronrod (7/15) over [breakpoints.front(), breakpoints.back()].
/// The interior breakpoints seed the initial panels; the panel with the
/// largest scaled error is bisected until every component satisfies
/// err_k <= max(abs_tol, rel_tol * sum_panels |I_k|). Throws NumericalError
/// with the achieved error when max_subdivisions is exhausted.
QuadResult integrate_adaptive(const std::function<QuadVector(double)>& integrand, std::span<const double> breakpoints,
                              const QuadratureConfig& config);

}  // namespace mdpdsf
