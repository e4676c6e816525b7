#include "mdpdsf/fit.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "mdpdsf/errors.hpp"
#include "mdpdsf/optimizer.hpp"
#include "mdpdsf/stats_core.hpp"

namespace mdpdsf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Optimizer coordinates: beta and mu unchanged, sigma = floor + exp(s).
Eigen::VectorXd to_free(PseudoFamily family, const Theta& theta) {
  Eigen::VectorXd z = pack(family, theta);
  const int n = static_cast<int>(z.size());
  for (int c = n - 2; c < n; ++c) z(c) = std::log(std::max(z(c) - kSigmaFloor, 1e-12));
  return z;
}

Theta from_free(PseudoFamily family, const Eigen::VectorXd& z, int q) {
  Eigen::VectorXd p = z;
  const int n = static_cast<int>(p.size());
  for (int c = n - 2; c < n; ++c) p(c) = kSigmaFloor + std::exp(p(c));
  return unpack(family, p, q);
}

struct Candidate {
  OptimizerResult opt;
  Theta theta;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.opt.converged != b.opt.converged) return a.opt.converged;
  if (std::abs(a.opt.value - b.opt.value) <= 1e-10) return a.opt.scaled_gradient_norm < b.opt.scaled_gradient_norm;
  return a.opt.value < b.opt.value;
}

// Same total scale as `start`, split evenly between noise and inefficiency.
Theta balanced_start(PseudoFamily family, const Theta& start) {
  Theta t = start;
  const double s = std::sqrt(0.5 * start.sigma_sq());
  t.sigma_v = std::max(s, kSigmaFloor);
  t.sigma_u = std::max(s, kSigmaFloor);
  if (t.beta.size() > 0) t.beta(0) += inefficiency_mean(family, t) - inefficiency_mean(family, start);
  return t;
}

void validate_options(const FitOptions& o) {
  if (!(o.grad_tol > 0.0)) throw ParameterDomainError("fit: grad_tol must be positive");
  if (o.max_iters < 1) throw ParameterDomainError("fit: max_iters must be at least 1");
  if (o.num_restarts < 0) throw ParameterDomainError("fit: num_restarts must be non-negative");
}

}  // namespace

Theta initialize(const Dataset& data, PseudoFamily family) {
  const int n = data.size();
  const int q = data.frontier.num_coefficients();
  if (n <= q + 2) throw DesignMatrixError("initialize: need more than q + 2 observations");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(data.design);
  if (qr.rank() < q) throw DesignMatrixError("initialize: design matrix is rank deficient");

  Theta theta;
  theta.beta = qr.solve(data.y);
  const Eigen::VectorXd resid = data.y - data.design * theta.beta;
  const Eigen::ArrayXd centered = resid.array() - resid.mean();
  const double m2 = centered.square().mean();
  const double m3 = centered.cube().mean();

  // Third central moment of -U and Var(U) per unit scale.
  double skew_coef = 0.0;
  double var_coef = 0.0;
  if (family == PseudoFamily::NE) {
    skew_coef = 2.0;
    var_coef = 1.0;
  } else {
    skew_coef = std::sqrt(2.0 / std::numbers::pi) * (4.0 / std::numbers::pi - 1.0);
    var_coef = 1.0 - 2.0 / std::numbers::pi;
  }
  double su = std::cbrt(std::max(-m3, 0.0) / skew_coef);
  double sv2 = m2 - var_coef * su * su;
  if (sv2 < 0.05 * m2) {
    su = std::sqrt(0.95 * m2 / var_coef);
    sv2 = 0.05 * m2;
  }
  theta.sigma_u = std::max(su, kSigmaFloor);
  theta.sigma_v = std::max(std::sqrt(std::max(sv2, 0.0)), kSigmaFloor);
  theta.mu = 0.0;
  if (data.frontier.has_intercept) theta.beta(0) += inefficiency_mean(family, theta);
  return theta;
}

FitResult fit_mdpd(const Dataset& data, PseudoFamily family, Alpha alpha, const FitOptions& options,
                   const std::optional<Theta>& warm_start) {
  validate_options(options);
  if (data.size() < 1) throw DegenerateDataError("fit_mdpd: empty dataset");
  const int q = data.frontier.num_coefficients();

  std::vector<Theta> starts;
  if (warm_start) starts.push_back(*warm_start);
  if (!warm_start || options.cold_starts) {
    const Theta init = initialize(data, family);
    starts.push_back(init);
    starts.push_back(balanced_start(family, init));
  }
  RngStream rng(options.seed, 0);
  const Theta anchor = starts.front();
  for (int r = 0; r < options.num_restarts; ++r) {
    Theta t = anchor;
    t.sigma_v = std::max(kSigmaFloor, t.sigma_v * std::exp(0.2 * rng.standard_normal()));
    t.sigma_u = std::max(kSigmaFloor, t.sigma_u * std::exp(0.2 * rng.standard_normal()));
    if (family == PseudoFamily::NT) t.mu += 0.2 * t.sigma_u * rng.standard_normal();
    starts.push_back(t);
  }

  const SmoothObjective fn = [&](const Eigen::VectorXd& z, Eigen::VectorXd& grad) {
    const Theta theta = from_free(family, z, q);
    const ObjectiveValue ov = evaluate_objective(data, family, theta, alpha, options.quad, true);
    grad = ov.gradient;
    const int n = static_cast<int>(grad.size());
    grad(n - 2) *= theta.sigma_v - kSigmaFloor;
    grad(n - 1) *= theta.sigma_u - kSigmaFloor;
    return ov.value;
  };
  const OptimizerOptions opt{options.grad_tol, options.max_iters};

  std::optional<Candidate> best;
  for (const Theta& start : starts) {
    Theta s = start;
    if (family != PseudoFamily::NT) s.mu = 0.0;
    OptimizerResult r = minimize_bfgs(fn, to_free(family, s), opt);
    if (!r.converged) {
      // Simplex escape from wherever BFGS stopped, then polish.
      const OptimizerResult nm = minimize_nelder_mead(fn, r.x, 0.1, 300 * static_cast<int>(r.x.size()));
      if (std::isfinite(nm.value)) {
        OptimizerResult again = minimize_bfgs(fn, nm.x, opt);
        again.iterations += r.iterations;
        if (std::isfinite(again.value) && (again.converged || again.value < r.value)) r = again;
      }
    }
    if (!std::isfinite(r.value)) continue;
    Candidate c{r, from_free(family, r.x, q)};
    if (!best || better(c, *best)) best = c;
  }

  FitResult out;
  out.family = family;
  out.frontier = data.frontier;
  out.alpha = alpha;
  out.restarts_used = static_cast<int>(starts.size());
  out.num_observations = data.size();
  if (!best) {
    out.theta_hat = starts.front();
    out.objective_value = kNaN;
    out.gradient_norm = kNaN;
    out.message = "every start failed to produce a finite objective";
    return out;
  }
  out.theta_hat = best->theta;
  out.objective_value = best->opt.value;
  out.gradient_norm = best->opt.scaled_gradient_norm;
  out.converged = best->opt.converged;
  out.iterations = best->opt.iterations;
  out.boundary_flag = out.theta_hat.lambda() <= 0.05 || out.theta_hat.sigma_u < 2.0 * kSigmaFloor;
  if (!out.converged) out.message = "optimizer did not reach the gradient tolerance";

  if (out.converged && options.compute_covariance) {
    try {
      JKMatrices jk = jk_matrices(data, family, out.theta_hat, alpha, options.quad);
      const Eigen::MatrixXd j_inv = jk.j.inverse();
      out.covariance = j_inv * jk.k * j_inv / static_cast<double>(data.size());
      out.covariance = (0.5 * (out.covariance + out.covariance.transpose())).eval();
      out.std_errors = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
      out.j = std::move(jk.j);
      out.k = std::move(jk.k);
      out.covariance_available = true;
    } catch (const SingularInformationError& e) {
      out.message = e.what();
    } catch (const NumericalError& e) {
      out.message = e.what();
    }
  }
  return out;
}

std::vector<FitResult> fit_alpha_path(const Dataset& data, PseudoFamily family, const FitOptions& options) {
  validate_options(options);
  for (std::size_t i = 1; i < options.alpha_path.size(); ++i)
    if (options.alpha_path[i] < options.alpha_path[i - 1])
      throw ParameterDomainError("fit_alpha_path: alpha_path must be ascending");
  std::vector<FitResult> out;
  std::optional<Theta> warm;
  for (Alpha a : options.alpha_path) {
    out.push_back(fit_mdpd(data, family, a, options, warm));
    if (std::isfinite(out.back().objective_value)) warm = out.back().theta_hat;
  }
  return out;
}

DerivedEstimates derived_estimates(const FitResult& fit) {
  const double sv = fit.theta_hat.sigma_v;
  const double su = fit.theta_hat.sigma_u;
  const auto se = [&](double dv, double du) {
    if (!fit.covariance_available) return kNaN;
    const Eigen::Vector2d grad(dv, du);
    const Eigen::Matrix2d block = fit.covariance.bottomRightCorner(2, 2);
    return std::sqrt(std::max(grad.dot(block * grad), 0.0));
  };
  DerivedEstimates d;
  d.sigma_sq = {sv * sv + su * su, se(2.0 * sv, 2.0 * su)};
  d.gamma = {su / sv, se(-su / (sv * sv), 1.0 / sv)};
  d.sigma_v_sq = {sv * sv, se(2.0 * sv, 0.0)};
  d.sigma_u_sq = {su * su, se(0.0, 2.0 * su)};
  return d;
}

}  // namespace mdpdsf
