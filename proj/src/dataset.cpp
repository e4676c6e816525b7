#include "mdpdsf/dataset.hpp"

#include <utility>

#include "mdpdsf/errors.hpp"

namespace mdpdsf {

Dataset Dataset::from_columns(Eigen::MatrixXd inputs, Eigen::VectorXd y, bool has_intercept) {
  if (inputs.rows() != y.size()) throw DegenerateDataError("dataset: inputs and y have different row counts");
  Dataset d;
  d.frontier.has_intercept = has_intercept;
  d.frontier.num_inputs = static_cast<int>(inputs.cols());
  d.inputs = std::move(inputs);
  d.y = std::move(y);
  for (int j = 0; j < d.frontier.num_inputs; ++j) d.input_names.push_back("x" + std::to_string(j + 1));
  d.refresh_design();
  return d;
}

void Dataset::refresh_design() {
  const int n = static_cast<int>(inputs.rows());
  design.resize(n, frontier.num_coefficients());
  if (frontier.has_intercept) {
    design.col(0).setOnes();
    design.rightCols(frontier.num_inputs) = inputs;
  } else {
    design = inputs;
  }
}

}  // namespace mdpdsf
