#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdpdsf/dataset.hpp"
#include "mdpdsf/mdpd_objective.hpp"
#include "mdpdsf/quadrature.hpp"
#include "mdpdsf/sf_models.hpp"

namespace mdpdsf {

struct FitOptions {
  double grad_tol = 1e-6;  // scaled by 1 + |objective|
  int max_iters = 500;
  int num_restarts = 3;  // jittered copies of the first start
  std::vector<Alpha> alpha_path;
  std::uint64_t seed = 0;
  QuadratureConfig quad;
  /// Also start from the moment-based initializers when a warm start is given.
  bool cold_starts = true;
  bool compute_covariance = true;
};

struct FitResult {
  PseudoFamily family = PseudoFamily::NH;
  FrontierSpec frontier;
  Theta theta_hat;
  Alpha alpha;
  double objective_value = 0.0;
  /// ||grad||_inf / (1 + |objective|) in the optimizer's coordinates
  /// (beta, mu, log(sigma_v - floor), log(sigma_u - floor)).
  double gradient_norm = 0.0;
  Eigen::MatrixXd j;
  Eigen::MatrixXd k;
  /// Sandwich J^-1 K J^-1 / n in packed theta order.
  Eigen::MatrixXd covariance;
  Eigen::VectorXd std_errors;
  bool covariance_available = false;
  bool converged = false;
  bool boundary_flag = false;
  int iterations = 0;
  int restarts_used = 0;
  int num_observations = 0;
  std::string message;
};

/// Corrected OLS: beta from least squares, (sigma_v, sigma_u) from the second
/// and third central moments of the residuals, intercept shifted by E[U].
/// Throws DesignMatrixError when n <= q + 2 or the design is rank deficient.
Theta initialize(const Dataset& data, PseudoFamily family);

/// Minimizes the mean MDPD loss over every start (warm start, moment-based
/// initializers, jittered restarts) and keeps the lowest objective. Never
/// throws for optimizer failure: the result carries converged = false.
FitResult fit_mdpd(const Dataset& data, PseudoFamily family, Alpha alpha, const FitOptions& options,
                   const std::optional<Theta>& warm_start = std::nullopt);

/// One fit per options.alpha_path entry (ascending), each warm-started from
/// the previous estimate.
std::vector<FitResult> fit_alpha_path(const Dataset& data, PseudoFamily family, const FitOptions& options);

struct DerivedEstimate {
  double value = 0.0;
  double se = 0.0;  // delta method; NaN without a covariance
};

/// (sigma^2, gamma) and variance reparameterizations with delta-method standard errors.
struct DerivedEstimates {
  DerivedEstimate sigma_sq;    // sigma_v^2 + sigma_u^2
  DerivedEstimate gamma;       // sigma_u / sigma_v
  DerivedEstimate sigma_v_sq;
  DerivedEstimate sigma_u_sq;
};

DerivedEstimates derived_estimates(const FitResult& fit);

}  // namespace mdpdsf
