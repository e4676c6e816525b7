#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mdpdsf/sf_models.hpp"

namespace mdpdsf {

/// Sample {(X_i, Y_i)} with its frontier design matrix.
struct Dataset {
  FrontierSpec frontier;
  Eigen::MatrixXd inputs;  // n x p
  Eigen::MatrixXd design;  // n x q, rows are FrontierSpec::design_row(inputs.row(i))
  Eigen::VectorXd y;
  /// Simulated inefficiency per row; empty when unknown, NaN on rows whose
  /// truth is unavailable (excluded from MSE_TE).
  Eigen::VectorXd true_u;
  std::vector<std::string> input_names;

  static Dataset from_columns(Eigen::MatrixXd inputs, Eigen::VectorXd y, bool has_intercept = true);

  int size() const { return static_cast<int>(y.size()); }
  int num_inputs() const { return static_cast<int>(inputs.cols()); }
  /// Rebuild `design` after editing `inputs`.
  void refresh_design();
};

}  // namespace mdpdsf
