#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace mdpdsf {

/// Value and gradient at x. Returning a non-finite value (or throwing
/// NumericalError) marks x as infeasible; the line search backs off.
using SmoothObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& gradient)>;

struct OptimizerOptions {
  double grad_tol = 1e-6;  // on ||g||_inf / (1 + |f|)
  int max_iters = 500;
};

struct OptimizerResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  double scaled_gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
};

/// Quasi-Newton (BFGS inverse-Hessian update, Armijo backtracking).
OptimizerResult minimize_bfgs(const SmoothObjective& fn, const Eigen::VectorXd& x0, const OptimizerOptions& options);

/// Derivative-free simplex search; used to escape points where the BFGS line
/// search stalls. Only function values are used.
OptimizerResult minimize_nelder_mead(const SmoothObjective& fn, const Eigen::VectorXd& x0, double initial_step,
                                     int max_evaluations);

}  // namespace mdpdsf
