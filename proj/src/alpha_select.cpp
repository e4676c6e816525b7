#include "mdpdsf/alpha_select.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>

#include "mdpdsf/errors.hpp"
#include "mdpdsf/stats_core.hpp"

namespace mdpdsf {

namespace {

int grid_points(int p) {
  if (p == 1) return 2001;
  if (p == 2) return 201;
  return std::max(3, static_cast<int>(std::pow(4.0e5, 1.0 / p)));
}

double draw_inefficiency(PseudoFamily family, const Theta& t, RngStream& rng) {
  switch (family) {
    case PseudoFamily::NH:
      return sample_half_normal(t.sigma_u, rng);
    case PseudoFamily::NT:
      return sample_truncated_normal(t.mu, t.sigma_u, rng);
    case PseudoFamily::NE:
      return sample_exponential(t.sigma_u, rng);
  }
  return 0.0;
}

struct Replicate {
  double sim = 0.0;
  int redraws = 0;
  bool ok = false;
};

}  // namespace

double similarity_index(const Dataset& data, const FitResult& fit0, const FitResult& fit1) {
  if (fit0.theta_hat.beta.size() != fit1.theta_hat.beta.size() ||
      fit0.frontier.has_intercept != fit1.frontier.has_intercept ||
      fit0.theta_hat.beta.size() != data.design.cols())
    throw ParameterDomainError("similarity_index: fits do not share the dataset's frontier");
  const int n = data.size();
  if (n < 1) throw DegenerateDataError("similarity_index: empty dataset");
  const double y_lo = data.y.minCoeff();
  const double y_hi = data.y.maxCoeff();
  if (!(y_hi > y_lo)) throw DegenerateDataError("similarity_index: output range is zero");

  const int p = data.num_inputs();
  const Eigen::VectorXd x_lo = data.inputs.colwise().minCoeff();
  const Eigen::VectorXd x_hi = data.inputs.colwise().maxCoeff();
  std::vector<int> points(static_cast<std::size_t>(p));
  for (int d = 0; d < p; ++d) points[static_cast<std::size_t>(d)] = x_hi(d) > x_lo(d) ? grid_points(p) : 1;

  const Eigen::VectorXd diff = fit0.theta_hat.beta - fit1.theta_hat.beta;
  const Eigen::VectorXd& b0 = fit0.theta_hat.beta;
  std::vector<int> idx(static_cast<std::size_t>(p), 0);
  Eigen::VectorXd x(p);
  double num = 0.0;
  double den = 0.0;
  for (;;) {
    double w = 1.0;
    for (int d = 0; d < p; ++d) {
      const int k = points[static_cast<std::size_t>(d)];
      const int i = idx[static_cast<std::size_t>(d)];
      if (k == 1) {
        x(d) = x_lo(d);
        continue;
      }
      x(d) = x_lo(d) + (x_hi(d) - x_lo(d)) * i / (k - 1);
      if (i == 0 || i == k - 1) w *= 0.5;
    }
    const Eigen::VectorXd row = fit0.frontier.design_row(x);
    const double g0 = b0.dot(row);
    const double g1 = g0 - diff.dot(row);
    const double lo = std::max(std::min(g0, g1), y_lo);
    const double hi = std::min(std::max(g0, g1), y_hi);
    num += w * std::max(hi - lo, 0.0);
    den += w;
    int d = 0;
    for (; d < p; ++d) {
      if (++idx[static_cast<std::size_t>(d)] < points[static_cast<std::size_t>(d)]) break;
      idx[static_cast<std::size_t>(d)] = 0;
    }
    if (d == p) break;
  }
  return num / (den * (y_hi - y_lo));
}

McsResult mcs_test(const Dataset& data, PseudoFamily family, const FitResult& fit0, const FitResult& fit1, int m,
                   std::uint64_t seed, const FitOptions& options) {
  if (m < 2) throw ParameterDomainError("mcs_test: m must be at least 2");
  if (!fit0.converged || !fit1.converged) throw NonConvergenceError("mcs_test: observed-data fits must converge");

  McsResult out;
  out.m = m;
  out.seed = seed;
  out.alpha0 = fit0.alpha;
  out.alpha1 = fit1.alpha;
  out.sim_observed = similarity_index(data, fit0, fit1);

  FitOptions boot = options;
  boot.num_restarts = 0;
  boot.compute_covariance = false;
  const Theta& t0 = fit0.theta_hat;
  const Eigen::VectorXd frontier = data.design * t0.beta;
  const int reps = m - 1;
  const int n = data.size();
  constexpr int kMaxRedraws = 3;

  std::vector<Replicate> results(static_cast<std::size_t>(reps));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < reps; ++b) {
    try {
      Replicate& r = results[static_cast<std::size_t>(b)];
      for (int attempt = 0; attempt <= kMaxRedraws && !r.ok; ++attempt) {
        RngStream rng(seed, static_cast<std::uint64_t>(b) + static_cast<std::uint64_t>(attempt) * m);
        Dataset sample = data;
        for (int i = 0; i < n; ++i)
          sample.y(i) = frontier(i) + t0.sigma_v * rng.standard_normal() - draw_inefficiency(family, t0, rng);
        sample.true_u.resize(0);
        const FitResult f0 = fit_mdpd(sample, family, fit0.alpha, boot, fit0.theta_hat);
        const FitResult f1 = fit_mdpd(sample, family, fit1.alpha, boot, fit1.theta_hat);
        r.redraws = attempt;
        if (f0.converged && f1.converged) {
          r.sim = similarity_index(sample, f0, f1);
          r.ok = true;
        }
      }
    } catch (...) {
      errors[static_cast<std::size_t>(b)] = std::current_exception();
    }
  }

  for (int b = 0; b < reps; ++b) {
    if (errors[static_cast<std::size_t>(b)]) std::rethrow_exception(errors[static_cast<std::size_t>(b)]);
    const Replicate& r = results[static_cast<std::size_t>(b)];
    if (!r.ok) throw NumericalError("mcs_test: bootstrap replicate " + std::to_string(b) + " failed after redraws");
    out.sim_bootstrap.push_back(r.sim);
    out.redraws += r.redraws;
  }
  out.sim_bootstrap_max = *std::max_element(out.sim_bootstrap.begin(), out.sim_bootstrap.end());
  out.accept = out.sim_observed <= out.sim_bootstrap_max;
  return out;
}

McsResult mcs_test(const Dataset& data, PseudoFamily family, const FitResult& fit0, Alpha alpha1, int m,
                   std::uint64_t seed, const FitOptions& options) {
  const FitResult fit1 = fit_mdpd(data, family, alpha1, options, fit0.theta_hat);
  return mcs_test(data, family, fit0, fit1, m, seed, options);
}

AlphaSelection select_alpha(const Dataset& data, PseudoFamily family, Alpha alpha_star,
                            const std::vector<Alpha>& alpha_grid, int m, std::uint64_t seed,
                            const FitOptions& options) {
  if (alpha_grid.empty() || !(alpha_grid.back() == alpha_star))
    throw ParameterDomainError("select_alpha: alpha_star must be the last grid element");
  if (!std::is_sorted(alpha_grid.begin(), alpha_grid.end()))
    throw ParameterDomainError("select_alpha: grid must be ascending");

  const auto must_fit = [&](Alpha a, const std::optional<Theta>& warm) {
    FitResult f = fit_mdpd(data, family, a, options, warm);
    if (!f.converged) throw NonConvergenceError("select_alpha: fit at alpha " + std::to_string(a.value()) + " failed");
    return f;
  };

  AlphaSelection out;
  const FitResult ml = must_fit(Alpha(0.0), std::nullopt);
  const FitResult star = must_fit(alpha_star, ml.theta_hat);
  out.steps.push_back(mcs_test(data, family, ml, star, m, seed, options));
  if (out.steps.back().accept) {
    out.alpha = Alpha(0.0);
    return out;
  }
  Theta warm = ml.theta_hat;
  for (Alpha a : alpha_grid) {
    if (a.value() <= 0.0 || !(a < alpha_star)) continue;
    const FitResult fa = must_fit(a, warm);
    warm = fa.theta_hat;
    out.steps.push_back(mcs_test(data, family, fa, star, m, seed, options));
    if (out.steps.back().accept) {
      out.alpha = a;
      return out;
    }
  }
  out.alpha = alpha_star;
  out.exhausted = true;
  return out;
}

std::vector<Alpha> default_alpha_grid() {
  return {Alpha(0.0), Alpha(0.05), Alpha(0.1), Alpha(0.2), Alpha(0.3), Alpha(0.4), Alpha(0.5)};
}

}  // namespace mdpdsf
