#include "mdpdsf/efficiency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdpdsf/errors.hpp"
#include "mdpdsf/stats_core.hpp"

namespace mdpdsf {

namespace {

struct Conditional {
  double mu_star;
  double sigma_star;
};

Conditional conditional(PseudoFamily family, const Theta& t, double e) {
  const double sv2 = t.sigma_v * t.sigma_v;
  if (family == PseudoFamily::NE) return {-e - sv2 / t.sigma_u, t.sigma_v};
  const double su2 = t.sigma_u * t.sigma_u;
  const double s2 = sv2 + su2;
  const double mu = family == PseudoFamily::NT ? t.mu : 0.0;
  return {(mu * sv2 - e * su2) / s2, std::sqrt(sv2 * su2 / s2)};
}

double score(const Conditional& c) {
  const double z = c.mu_star / c.sigma_star;
  const double log_te =
      log_std_normal_cdf(z - c.sigma_star) - log_std_normal_cdf(z) - c.mu_star + 0.5 * c.sigma_star * c.sigma_star;
  // E[exp(-U)] with U >= 0 cannot exceed one; clamp rounding at the edge.
  // Far below the frontier the score underflows, so it is floored at the
  // smallest normal double to stay strictly positive.
  return std::max(std::exp(std::min(log_te, 0.0)), std::numeric_limits<double>::min());
}

}  // namespace

double te_score(PseudoFamily family, const Theta& theta, double residual) {
  validate_theta(family, theta);
  return score(conditional(family, theta, residual));
}

TEScores technical_efficiency(const FitResult& fit, const Dataset& data) {
  if (!fit.converged) throw NonConvergenceError("technical_efficiency: fit did not converge");
  validate_theta(fit.family, fit.theta_hat);
  if (data.design.cols() != fit.theta_hat.beta.size())
    throw ParameterDomainError("technical_efficiency: dataset does not match the fitted frontier");
  const int n = data.size();
  TEScores out;
  out.residuals = data.y - data.design * fit.theta_hat.beta;
  out.te.resize(n);
  out.mu_star.resize(n);
  out.sigma_star.resize(n);
#pragma omp parallel for schedule(static) if (n >= 1024)
  for (int i = 0; i < n; ++i) {
    const Conditional c = conditional(fit.family, fit.theta_hat, out.residuals(i));
    out.mu_star(i) = c.mu_star;
    out.sigma_star(i) = c.sigma_star;
    out.te(i) = score(c);
  }
  return out;
}

double mse_te(const TEScores& scores, const Eigen::VectorXd& true_u) {
  if (scores.te.size() != true_u.size()) throw ParameterDomainError("mse_te: length mismatch");
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < true_u.size(); ++i) {
    if (std::isnan(true_u(i))) continue;
    const double d = scores.te(i) - std::exp(-true_u(i));
    sum += d * d;
    ++count;
  }
  if (count == 0) throw UndefinedMetricError("mse_te: no rows with a known inefficiency");
  return sum / count;
}

}  // namespace mdpdsf
