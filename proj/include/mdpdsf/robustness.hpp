#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mdpdsf/dataset.hpp"
#include "mdpdsf/fit.hpp"
#include "mdpdsf/mdpd_objective.hpp"
#include "mdpdsf/sf_models.hpp"
#include "mdpdsf/stats_core.hpp"

namespace mdpdsf {

enum class ContaminationKind { None, Upward, Downward };

std::string to_string(ContaminationKind kind);
ContaminationKind parse_contamination(const std::string& name);  // none | up | down

struct Contamination {
  ContaminationKind kind = ContaminationKind::None;
  int n_outliers = 0;
  double p_v = 5.0;  // upward shift in units of sigma_v
};

/// Y = g(X, beta) + V - U with X ~ U(0,1)^p, V ~ N(0, sigma_v^2) and U drawn
/// from `family` (half-normal by default).
struct SimConfig {
  int n = 500;
  int replications = 200;
  PseudoFamily family = PseudoFamily::NH;
  Theta truth = default_truth();
  Contamination contamination;
  std::vector<Alpha> alpha_list = default_alpha_list();
  std::uint64_t seed = 20240101;
  FitOptions fit;

  static Theta default_truth();  // (5, 5, sigma_v^2 = 0.75, sigma_u^2 = 1)
  static std::vector<Alpha> default_alpha_list();
};

void validate_sim_config(const SimConfig& config);

Dataset generate_clean(const SimConfig& config, RngStream& rng);

/// Replaces n_o rows (drawn without replacement) by fresh X on the frontier
/// shifted up by p_v sigma_v; their true U becomes 0.
Dataset contaminate_upward(const Dataset& data, int n_outliers, double p_v, const Theta& truth, RngStream& rng);

/// Replaces n_o rows by X ~ U(0,1)^p, Y ~ U(0.5, 1); their true U becomes NaN.
Dataset contaminate_downward(const Dataset& data, int n_outliers, RngStream& rng);

/// sqrt of the summed squared relative errors of beta, sigma_v^2 and sigma_u^2.
double metric_d(const Theta& theta_hat, const Theta& truth);

/// Rows -J^-1 dH(x0, y0; theta_hat) for each y0. J is the one stored in `fit`.
Eigen::MatrixXd influence_curve(const FitResult& fit, const Eigen::VectorXd& x0, const Eigen::VectorXd& y0_grid,
                                const QuadratureConfig& quad = {});

struct ParameterSummary {
  std::string name;
  double truth = 0.0;
  double mean = 0.0;
  double sd = 0.0;   // n - 1 denominator
  double mse = 0.0;  // mean squared deviation from truth
};

struct EstimatorSummary {
  Alpha alpha;
  std::vector<ParameterSummary> parameters;
  double mean_d = 0.0;
  double ratio_d = 0.0;  // mean_d / mean_d of the alpha = 0 row
  double mse_te = 0.0;
  int boundary_count = 0;
};

struct SimReport {
  SimConfig config;
  int completed = 0;
  int failed = 0;
  std::vector<EstimatorSummary> estimators;
  double runtime_seconds = 0.0;  // not part of the serialized report
};

/// Every replication r uses RngStream(config.seed, r). Replications where some
/// fit fails are dropped; more than 2% dropped throws NumericalError.
SimReport run_simulation(const SimConfig& config);

}  // namespace mdpdsf
