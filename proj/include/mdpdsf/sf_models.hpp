#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>

namespace mdpdsf {

/// Lower bound on both scale parameters.
inline constexpr double kSigmaFloor = 1e-4;

/// Pseudo distribution pair for (V, U):
///   NT  normal / truncated normal N+(mu, sigma_u^2)
///   NH  normal / half normal (NT with mu pinned to 0)
///   NE  normal / exponential with mean sigma_u
enum class PseudoFamily { NT, NH, NE };

std::string to_string(PseudoFamily family);
PseudoFamily parse_family(std::string_view text);

/// Linear frontier g(x, beta) = beta' [1, x] (or beta' x without intercept).
struct FrontierSpec {
  bool has_intercept = true;
  int num_inputs = 1;

  int num_coefficients() const { return num_inputs + (has_intercept ? 1 : 0); }
  Eigen::VectorXd design_row(const Eigen::Ref<const Eigen::VectorXd>& inputs) const;
};

struct Theta {
  Eigen::VectorXd beta;
  double mu = 0.0;  // NT only
  double sigma_v = 1.0;
  double sigma_u = 1.0;

  double sigma_sq() const { return sigma_v * sigma_v + sigma_u * sigma_u; }
  double sigma() const;
  /// sigma_u / sigma_v (reported as gamma in the tables)
  double lambda() const { return sigma_u / sigma_v; }
};

/// Length of the packed parameter vector [beta, (mu), sigma_v, sigma_u].
int parameter_dim(PseudoFamily family, int num_coefficients);
Eigen::VectorXd pack(PseudoFamily family, const Theta& theta);
Theta unpack(PseudoFamily family, const Eigen::Ref<const Eigen::VectorXd>& packed, int num_coefficients);

/// Throws ParameterDomainError unless both scales are >= kSigmaFloor, every
/// component is finite and mu is zero for the NH family.
void validate_theta(PseudoFamily family, const Theta& theta);

/// log f and the score of the residual density e = y - g(x, beta).
/// d_g is the derivative with respect to the frontier value g, so the beta
/// block of the score is d_g times the design row.
struct ResidualScore {
  double log_f;
  double d_g;
  double d_mu;  // zero unless NT
  double d_sigma_v;
  double d_sigma_u;
};

/// No validation; callers check theta once per evaluation.
ResidualScore residual_score(PseudoFamily family, const Theta& theta, double residual);

/// Mean of U under the pseudo inefficiency distribution.
double inefficiency_mean(PseudoFamily family, const Theta& theta);

double log_density(PseudoFamily family, const Theta& theta, const Eigen::Ref<const Eigen::VectorXd>& design_row,
                   double y);

/// d f_theta(y|x) / d theta in packed order.
Eigen::VectorXd density_gradient(PseudoFamily family, const Theta& theta,
                                 const Eigen::Ref<const Eigen::VectorXd>& design_row, double y);

/// d log f_theta(y|x) / d theta in packed order.
Eigen::VectorXd log_density_gradient(PseudoFamily family, const Theta& theta,
                                     const Eigen::Ref<const Eigen::VectorXd>& design_row, double y);

/// Box of admissible (mu, sigma) values; both scales share [sigma_lo, sigma_hi].
struct ParameterBox {
  double mu_lo = 0.0;
  double mu_hi = 0.0;
  double sigma_lo = kSigmaFloor;
  double sigma_hi = 1.0;
};

/// Global constant C with f_theta(y|x) <= C over the box, all x and y.
double density_upper_bound(PseudoFamily family, const ParameterBox& box);

}  // namespace mdpdsf
