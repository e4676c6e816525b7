#include "mdpdsf/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "mdpdsf/errors.hpp"

namespace mdpdsf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const SmoothObjective& fn, const Eigen::VectorXd& x, Eigen::VectorXd& g) {
  try {
    const double v = fn(x, g);
    if (!std::isfinite(v) || !g.allFinite()) return kInf;
    return v;
  } catch (const NumericalError&) {
    return kInf;
  } catch (const ParameterDomainError&) {
    return kInf;
  }
}

double scaled_norm(const Eigen::VectorXd& g, double f) { return g.lpNorm<Eigen::Infinity>() / (1.0 + std::abs(f)); }

}  // namespace

OptimizerResult minimize_bfgs(const SmoothObjective& fn, const Eigen::VectorXd& x0, const OptimizerOptions& options) {
  const int n = static_cast<int>(x0.size());
  OptimizerResult res;
  res.x = x0;
  res.gradient = Eigen::VectorXd::Zero(n);
  res.value = safe_eval(fn, res.x, res.gradient);
  if (!std::isfinite(res.value)) {
    res.line_search_failed = true;
    res.scaled_gradient_norm = kInf;
    return res;
  }

  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  Eigen::VectorXd g_new(n);
  for (res.iterations = 0; res.iterations < options.max_iters; ++res.iterations) {
    res.scaled_gradient_norm = scaled_norm(res.gradient, res.value);
    if (res.scaled_gradient_norm <= options.grad_tol) {
      res.converged = true;
      return res;
    }
    Eigen::VectorXd dir = -h * res.gradient;
    double slope = res.gradient.dot(dir);
    if (!(slope < 0.0)) {
      h.setIdentity();
      dir = -res.gradient;
      slope = res.gradient.dot(dir);
    }
    double step = 1.0;
    if (!scaled) step = std::min(1.0, 1.0 / res.gradient.lpNorm<Eigen::Infinity>());

    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = kInf;
    for (int k = 0; k < 60; ++k) {
      x_new = res.x + step * dir;
      f_new = safe_eval(fn, x_new, g_new);
      if (f_new <= res.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      double shrink = 0.5;
      if (std::isfinite(f_new)) {
        // Minimizer of the quadratic through f(0), f'(0) and f(step).
        const double denom = 2.0 * (f_new - res.value - slope * step);
        if (denom > 0.0) shrink = std::clamp(-slope * step / denom, 0.1, 0.5);
      }
      step *= shrink;
    }
    if (!accepted) {
      res.line_search_failed = true;
      return res;
    }

    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - res.gradient;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = h * y;
      h += (rho * rho * y.dot(hy) + rho) * s * s.transpose() - rho * (hy * s.transpose() + s * hy.transpose());
    }
    res.x = x_new;
    res.value = f_new;
    res.gradient = g_new;
  }
  res.scaled_gradient_norm = scaled_norm(res.gradient, res.value);
  res.converged = res.scaled_gradient_norm <= options.grad_tol;
  return res;
}

OptimizerResult minimize_nelder_mead(const SmoothObjective& fn, const Eigen::VectorXd& x0, double initial_step,
                                     int max_evaluations) {
  const int n = static_cast<int>(x0.size());
  Eigen::VectorXd scratch(n);
  std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> values(static_cast<std::size_t>(n + 1));
  for (int i = 0; i < n; ++i) simplex[static_cast<std::size_t>(i + 1)](i) += initial_step;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return safe_eval(fn, x, scratch);
  };
  for (std::size_t i = 0; i < simplex.size(); ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(simplex.size());
  while (evals < max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    if (std::abs(values[worst] - values[best]) <= 1e-13 * (1.0 + std::abs(values[best]))) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < simplex.size(); ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= n;

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = eval(reflected);
    if (fr < values[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const Eigen::VectorXd contracted = centroid + 0.5 * (simplex[worst] - centroid);
    const double fc = eval(contracted);
    if (fc < values[worst]) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = eval(simplex[i]);
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  OptimizerResult res;
  res.x = simplex[static_cast<std::size_t>(it - values.begin())];
  res.gradient = Eigen::VectorXd::Zero(n);
  res.value = safe_eval(fn, res.x, res.gradient);
  res.scaled_gradient_norm = scaled_norm(res.gradient, res.value);
  res.iterations = evals;
  return res;
}

}  // namespace mdpdsf
