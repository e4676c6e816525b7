#include "mdpdsf/mdpd_objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mdpdsf/errors.hpp"

namespace mdpdsf {

Alpha::Alpha(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0))
    throw ParameterDomainError("alpha must lie in [0, 1], got " + std::to_string(value));
}

namespace {

// Integration window and initial panel breakpoints on the residual scale
// e = y - g. The right edge is W sigma_v above the frontier; the left edge
// adds an upper bound for U (W sigma_u past the mode for the normal families,
// 3W sigma_u for the exponential tail).
std::vector<double> residual_breakpoints(PseudoFamily family, const Theta& t, double w) {
  const double sv = t.sigma_v;
  const double su = t.sigma_u;
  double u_hi = w * su;
  if (family == PseudoFamily::NT) u_hi += std::max(t.mu, 0.0);
  if (family == PseudoFamily::NE) u_hi = 3.0 * w * su;
  const double left = -(u_hi + w * sv);
  const double right = w * sv;
  const double m = inefficiency_mean(family, t);

  std::vector<double> pts{left, right, 0.0, -m};
  for (double k : {1.0, 3.0, 6.0}) {
    pts.push_back(k * sv);
    pts.push_back(-k * sv);
    pts.push_back(-m - k * sv);
    pts.push_back(-m + k * sv);
    pts.push_back(-m - k * su);
  }
  std::vector<double> out;
  for (double p : pts)
    if (p >= left && p <= right) out.push_back(p);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return b - a <= 1e-12 * (1.0 + std::abs(a)); }),
            out.end());
  return out;
}

void check_inputs(PseudoFamily family, const Theta& theta, const QuadratureConfig& quad) {
  validate_theta(family, theta);
  validate_quadrature(quad);
}

// Per-observation terms of one evaluation: H_alpha and the coefficients of
// its gradient (beta block = c_g * design row).
struct ObservationTerms {
  double h;
  double c_g;
  double c_mu;
  double c_sv;
  double c_su;
};

inline ObservationTerms observation_terms(PseudoFamily family, const Theta& theta, double alpha, const PowerTerms& pt,
                                          double residual) {
  const ResidualScore r = residual_score(family, theta, residual);
  if (alpha == 0.0) return {-r.log_f, -r.d_g, -r.d_mu, -r.d_sigma_v, -r.d_sigma_u};
  const double w = std::exp(alpha * r.log_f);
  const double a1 = 1.0 + alpha;
  return {pt.power - (1.0 + 1.0 / alpha) * w, a1 * (pt.score_g - r.d_g * w), a1 * (pt.score_mu - r.d_mu * w),
          a1 * (pt.score_sigma_v - r.d_sigma_v * w), a1 * (pt.score_sigma_u - r.d_sigma_u * w)};
}

void scatter_gradient(PseudoFamily family, const ObservationTerms& o, const Eigen::Ref<const Eigen::VectorXd>& row,
                      Eigen::Ref<Eigen::VectorXd> out) {
  const int q = static_cast<int>(row.size());
  out.head(q) = o.c_g * row;
  int k = q;
  if (family == PseudoFamily::NT) out(k++) = o.c_mu;
  out(k++) = o.c_sv;
  out(k) = o.c_su;
}

PowerTerms likelihood_power_terms() { return PowerTerms{}; }

}  // namespace

PowerTerms power_terms(PseudoFamily family, const Theta& theta, Alpha alpha, const QuadratureConfig& quad) {
  check_inputs(family, theta, quad);
  const double exponent = 1.0 + alpha.value();
  const auto integrand = [&](double e) {
    const ResidualScore r = residual_score(family, theta, e);
    const double w = std::exp(exponent * r.log_f);
    QuadVector v;
    v << w, w * r.d_g, w * r.d_mu, w * r.d_sigma_v, w * r.d_sigma_u;
    return v;
  };
  const std::vector<double> bp = residual_breakpoints(family, theta, quad.window_halfwidth_sigmas);
  const QuadResult res = integrate_adaptive(integrand, bp, quad);
  PowerTerms pt;
  pt.power = res.value(0);
  pt.score_g = res.value(1);
  pt.score_mu = res.value(2);
  pt.score_sigma_v = res.value(3);
  pt.score_sigma_u = res.value(4);
  pt.subdivisions = res.subdivisions;
  return pt;
}

double power_integral(PseudoFamily family, const Theta& theta, const Eigen::Ref<const Eigen::VectorXd>& design_row,
                      Alpha alpha, const QuadratureConfig& quad) {
  if (design_row.size() != theta.beta.size()) throw ParameterDomainError("power_integral: design row length mismatch");
  return power_terms(family, theta, alpha, quad).power;
}

double h_alpha(PseudoFamily family, const Theta& theta, const Eigen::Ref<const Eigen::VectorXd>& design_row, double y,
               Alpha alpha, const QuadratureConfig& quad) {
  check_inputs(family, theta, quad);
  const double e = y - theta.beta.dot(design_row);
  if (alpha.is_likelihood()) return -residual_score(family, theta, e).log_f;
  const PowerTerms pt = power_terms(family, theta, alpha, quad);
  return observation_terms(family, theta, alpha.value(), pt, e).h;
}

Eigen::VectorXd h_alpha_gradient(PseudoFamily family, const Theta& theta,
                                 const Eigen::Ref<const Eigen::VectorXd>& design_row, double y, Alpha alpha,
                                 const QuadratureConfig& quad) {
  check_inputs(family, theta, quad);
  const double e = y - theta.beta.dot(design_row);
  const PowerTerms pt = alpha.is_likelihood() ? likelihood_power_terms() : power_terms(family, theta, alpha, quad);
  Eigen::VectorXd g(parameter_dim(family, static_cast<int>(theta.beta.size())));
  scatter_gradient(family, observation_terms(family, theta, alpha.value(), pt, e), design_row, g);
  return g;
}

ObjectiveValue evaluate_objective(const Dataset& data, PseudoFamily family, const Theta& theta, Alpha alpha,
                                  const QuadratureConfig& quad, bool with_gradient) {
  check_inputs(family, theta, quad);
  const int n = data.size();
  const int q = static_cast<int>(theta.beta.size());
  if (n < 1) throw DegenerateDataError("objective: empty dataset");
  if (data.design.cols() != q) throw ParameterDomainError("objective: beta length does not match the design");

  const PowerTerms pt = alpha.is_likelihood() ? likelihood_power_terms() : power_terms(family, theta, alpha, quad);
  const double a = alpha.value();

  std::vector<ObservationTerms> terms(static_cast<std::size_t>(n));
  const Eigen::VectorXd fitted = data.design * theta.beta;
#pragma omp parallel for schedule(static) if (n >= 256)
  for (int i = 0; i < n; ++i) {
    terms[static_cast<std::size_t>(i)] = observation_terms(family, theta, a, pt, data.y(i) - fitted(i));
  }

  // Fixed row-order reduction.
  ObjectiveValue out;
  double sum = 0.0;
  for (const ObservationTerms& o : terms) sum += o.h;
  out.value = sum / n;
  if (!with_gradient) return out;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(parameter_dim(family, q));
  double s_mu = 0.0, s_sv = 0.0, s_su = 0.0;
  for (int i = 0; i < n; ++i) {
    const ObservationTerms& o = terms[static_cast<std::size_t>(i)];
    grad.head(q) += o.c_g * data.design.row(i).transpose();
    s_mu += o.c_mu;
    s_sv += o.c_sv;
    s_su += o.c_su;
  }
  int k = q;
  if (family == PseudoFamily::NT) grad(k++) = s_mu;
  grad(k++) = s_sv;
  grad(k) = s_su;
  out.gradient = grad / n;
  return out;
}

double objective(const Dataset& data, PseudoFamily family, const Theta& theta, Alpha alpha,
                 const QuadratureConfig& quad) {
  return evaluate_objective(data, family, theta, alpha, quad, false).value;
}

Eigen::MatrixXd observation_gradients(const Dataset& data, PseudoFamily family, const Theta& theta, Alpha alpha,
                                      const QuadratureConfig& quad) {
  check_inputs(family, theta, quad);
  const int n = data.size();
  const int q = static_cast<int>(theta.beta.size());
  const PowerTerms pt = alpha.is_likelihood() ? likelihood_power_terms() : power_terms(family, theta, alpha, quad);
  Eigen::MatrixXd g(n, parameter_dim(family, q));
  const Eigen::VectorXd fitted = data.design * theta.beta;
#pragma omp parallel for schedule(static) if (n >= 256)
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd row(g.cols());
    scatter_gradient(family, observation_terms(family, theta, alpha.value(), pt, data.y(i) - fitted(i)),
                     data.design.row(i).transpose(), row);
    g.row(i) = row.transpose();
  }
  return g;
}

JKMatrices jk_matrices(const Dataset& data, PseudoFamily family, const Theta& theta_hat, Alpha alpha,
                       const QuadratureConfig& quad) {
  const int q = static_cast<int>(theta_hat.beta.size());
  const Eigen::VectorXd center = pack(family, theta_hat);
  const int dim = static_cast<int>(center.size());
  const int first_scale = dim - 2;

  Eigen::MatrixXd j(dim, dim);
  for (int c = 0; c < dim; ++c) {
    double h = 1e-4 * std::max(1.0, std::abs(center(c)));
    // Keep both probes above the scale floor.
    if (c >= first_scale) h = std::min(h, 0.5 * (center(c) - kSigmaFloor));
    if (!(h > 0.0)) throw SingularInformationError("jk_matrices: scale parameter sits on the floor");
    Eigen::VectorXd plus = center, minus = center;
    plus(c) += h;
    minus(c) -= h;
    const Eigen::VectorXd gp = evaluate_objective(data, family, unpack(family, plus, q), alpha, quad).gradient;
    const Eigen::VectorXd gm = evaluate_objective(data, family, unpack(family, minus, q), alpha, quad).gradient;
    j.col(c) = (gp - gm) / (2.0 * h);
  }
  JKMatrices out;
  out.j = 0.5 * (j + j.transpose());

  const Eigen::MatrixXd g = observation_gradients(data, family, theta_hat, alpha, quad);
  const Eigen::RowVectorXd mean = g.colwise().mean();
  const Eigen::MatrixXd centered = g.rowwise() - mean;
  out.k = (centered.transpose() * centered) / static_cast<double>(g.rows());

  Eigen::LLT<Eigen::MatrixXd> llt(out.j);
  if (llt.info() != Eigen::Success)
    throw SingularInformationError("jk_matrices: Hessian of the objective is not positive definite");
  return out;
}

namespace reference {

ObjectiveValue evaluate_objective_serial(const Dataset& data, PseudoFamily family, const Theta& theta, Alpha alpha,
                                         const QuadratureConfig& quad) {
  const int n = data.size();
  ObjectiveValue out;
  out.gradient = Eigen::VectorXd::Zero(parameter_dim(family, static_cast<int>(theta.beta.size())));
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd row = data.design.row(i).transpose();
    out.value += h_alpha(family, theta, row, data.y(i), alpha, quad);
    out.gradient += h_alpha_gradient(family, theta, row, data.y(i), alpha, quad);
  }
  out.value /= n;
  out.gradient /= n;
  return out;
}

}  // namespace reference

}  // namespace mdpdsf
