#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "mdpdsf/dataset.hpp"
#include "mdpdsf/robustness.hpp"
#include "mdpdsf/sf_models.hpp"
#include "mdpdsf/stats_core.hpp"

namespace testsupport {

using namespace mdpdsf;

inline double rel_err(double a, double b, double floor = 1e-300) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Central difference of a scalar function along coordinate c of x.
inline double central_diff(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x, int c,
                           double h) {
  const double x0 = x(c);
  x(c) = x0 + h;
  const double fp = f(x);
  x(c) = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

/// Richardson-extrapolated central difference (error O(h^4)).
inline double richardson_diff(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                              int c, double h) {
  return (4.0 * central_diff(f, x, c, h / 2) - central_diff(f, x, c, h)) / 3.0;
}

/// Theta with beta in [-2, 2]^q, scales in [0.3, 2], mu in [-1, 1] for NT.
inline Theta random_theta(PseudoFamily family, int q, RngStream& rng) {
  Theta t;
  t.beta.resize(q);
  for (int k = 0; k < q; ++k) t.beta(k) = -2.0 + 4.0 * rng.uniform();
  t.sigma_v = 0.3 + 1.7 * rng.uniform();
  t.sigma_u = 0.3 + 1.7 * rng.uniform();
  t.mu = family == PseudoFamily::NT ? -1.0 + 2.0 * rng.uniform() : 0.0;
  return t;
}

/// Clean baseline sample: X ~ U(0,1), truth (5, 5, 0.75, 1).
inline Dataset baseline_sample(int n, std::uint64_t seed, PseudoFamily family = PseudoFamily::NH) {
  SimConfig c;
  c.n = n;
  c.family = family;
  RngStream rng(seed, 0);
  return generate_clean(c, rng);
}

/// Single-input firm data (log output vs log capital per worker): X ~ N(5, 1.3^2),
/// Y = 7 + 0.38 X + V - U with sigma_v^2 = sigma_u^2 = 0.13. The first n_out
/// rows carry an extra 2.5 + U(0,1) of inefficiency (downward outliers).
inline Dataset firm_sample(std::uint64_t seed, int n = 500, int n_out = 15) {
  RngStream r(seed, 0);
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd y(n);
  const double s = std::sqrt(0.13);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 5.0 + 1.3 * r.standard_normal();
    double u = sample_half_normal(s, r);
    if (i < n_out) u += 2.5 + r.uniform();
    y(i) = 7.0 + 0.38 * x(i, 0) + s * r.standard_normal() - u;
  }
  return Dataset::from_columns(x, y);
}

/// Drops rows whose internally studentized OLS residual exceeds `cut` in
/// absolute value.
inline Dataset drop_studentized_outliers(const Dataset& d, double cut = 3.0) {
  const Eigen::MatrixXd& a = d.design;
  const Eigen::MatrixXd ata_inv = (a.transpose() * a).inverse();
  const Eigen::VectorXd beta = ata_inv * a.transpose() * d.y;
  const Eigen::VectorXd e = d.y - a * beta;
  const double s2 = e.squaredNorm() / static_cast<double>(d.size() - a.cols());
  std::vector<int> keep;
  for (int i = 0; i < d.size(); ++i) {
    const double h = a.row(i) * ata_inv * a.row(i).transpose();
    if (std::abs(e(i)) / std::sqrt(s2 * (1.0 - h)) <= cut) keep.push_back(i);
  }
  Eigen::MatrixXd x(static_cast<int>(keep.size()), d.inputs.cols());
  Eigen::VectorXd y(static_cast<int>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    x.row(static_cast<int>(k)) = d.inputs.row(keep[k]);
    y(static_cast<int>(k)) = d.y(keep[k]);
  }
  return Dataset::from_columns(x, y);
}

}  // namespace testsupport
