#pragma once

#include <Eigen/Dense>

#include "mdpdsf/dataset.hpp"
#include "mdpdsf/fit.hpp"
#include "mdpdsf/sf_models.hpp"

namespace mdpdsf {

/// Battese–Coelli scores E[exp(-U) | e_i] with the conditional location and
/// scale of U given the residual.
struct TEScores {
  Eigen::VectorXd te;
  Eigen::VectorXd mu_star;
  Eigen::VectorXd sigma_star;  // standard deviation of the pre-truncation normal
  Eigen::VectorXd residuals;
};

/// Score of a single residual. U | e is N(mu*, sigma*^2) truncated to [0, inf):
///   NH/NT: mu* = (mu sigma_v^2 - e sigma_u^2) / sigma^2, sigma*^2 = sigma_v^2 sigma_u^2 / sigma^2
///   NE:    mu* = -e - sigma_v^2 / sigma_u,              sigma* = sigma_v
double te_score(PseudoFamily family, const Theta& theta, double residual);

/// Throws NonConvergenceError for a fit that did not converge.
TEScores technical_efficiency(const FitResult& fit, const Dataset& data);

/// Mean of (te_i - exp(-U_i))^2 over rows whose U_i is not NaN.
double mse_te(const TEScores& scores, const Eigen::VectorXd& true_u);

}  // namespace mdpdsf
