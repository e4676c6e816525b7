#pragma once

#include <Eigen/Dense>

#include "mdpdsf/dataset.hpp"
#include "mdpdsf/quadrature.hpp"
#include "mdpdsf/sf_models.hpp"

namespace mdpdsf {

/// Robustness tuning parameter, 0 <= value <= 1. Zero selects the
/// quasi-likelihood branch H_0 = -log f.
class Alpha {
 public:
  constexpr Alpha() = default;
  explicit Alpha(double value);

  double value() const noexcept { return value_; }
  bool is_likelihood() const noexcept { return value_ == 0.0; }

  friend bool operator==(Alpha a, Alpha b) { return a.value_ == b.value_; }
  friend auto operator<=>(Alpha a, Alpha b) { return a.value_ <=> b.value_; }

 private:
  double value_ = 0.0;
};

/// Model-only integrals of one theta: the power integral
/// int f^(1+alpha) dy and the score integral int U f^(1+alpha) dy, where the
/// beta block of the score integral is `score_g` times the design row.
struct PowerTerms {
  double power = 1.0;
  double score_g = 0.0;
  double score_mu = 0.0;
  double score_sigma_v = 0.0;
  double score_sigma_u = 0.0;
  int subdivisions = 0;
};

/// Both integrals are independent of the design row (the densities depend on
/// y only through y - g(x, beta)), so one evaluation serves all observations.
PowerTerms power_terms(PseudoFamily family, const Theta& theta, Alpha alpha, const QuadratureConfig& quad);

double power_integral(PseudoFamily family, const Theta& theta, const Eigen::Ref<const Eigen::VectorXd>& design_row,
                      Alpha alpha, const QuadratureConfig& quad);

/// Per-observation loss H_alpha(x, y; theta).
double h_alpha(PseudoFamily family, const Theta& theta, const Eigen::Ref<const Eigen::VectorXd>& design_row, double y,
               Alpha alpha, const QuadratureConfig& quad);

/// d H_alpha / d theta in packed order.
Eigen::VectorXd h_alpha_gradient(PseudoFamily family, const Theta& theta,
                                 const Eigen::Ref<const Eigen::VectorXd>& design_row, double y, Alpha alpha,
                                 const QuadratureConfig& quad);

struct ObjectiveValue {
  double value = 0.0;
  Eigen::VectorXd gradient;  // empty unless requested
};

/// Mean of H_alpha over the sample and (optionally) its gradient. Observation
/// terms are computed in parallel into per-row buffers and reduced in row
/// order, so the result does not depend on the thread count.
ObjectiveValue evaluate_objective(const Dataset& data, PseudoFamily family, const Theta& theta, Alpha alpha,
                                  const QuadratureConfig& quad, bool with_gradient = true);

double objective(const Dataset& data, PseudoFamily family, const Theta& theta, Alpha alpha,
                 const QuadratureConfig& quad);

/// Row i holds d H_alpha(X_i, Y_i; theta) / d theta.
Eigen::MatrixXd observation_gradients(const Dataset& data, PseudoFamily family, const Theta& theta, Alpha alpha,
                                      const QuadratureConfig& quad);

struct JKMatrices {
  Eigen::MatrixXd j;  // Hessian of the mean objective
  Eigen::MatrixXd k;  // covariance of per-observation gradients
};

/// J by central differences of the analytic mean gradient (step
/// 1e-4 * max(1, |theta_j|)), symmetrized; K as the sample covariance of
/// observation_gradients. Throws SingularInformationError when J is not
/// positive definite.
JKMatrices jk_matrices(const Dataset& data, PseudoFamily family, const Theta& theta_hat, Alpha alpha,
                       const QuadratureConfig& quad);

namespace reference {

/// Straight per-observation loop over h_alpha / h_alpha_gradient (one
/// quadrature per row). Slow; kept as the check on evaluate_objective.
ObjectiveValue evaluate_objective_serial(const Dataset& data, PseudoFamily family, const Theta& theta, Alpha alpha,
                                         const QuadratureConfig& quad);

}  // namespace reference

}  // namespace mdpdsf
