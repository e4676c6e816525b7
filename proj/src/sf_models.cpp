#include "mdpdsf/sf_models.hpp"

#include <cmath>
#include <numbers>

#include "mdpdsf/errors.hpp"
#include "mdpdsf/stats_core.hpp"

namespace mdpdsf {

std::string to_string(PseudoFamily family) {
  switch (family) {
    case PseudoFamily::NT: return "nt";
    case PseudoFamily::NH: return "nh";
    case PseudoFamily::NE: return "ne";
  }
  return "?";
}

PseudoFamily parse_family(std::string_view text) {
  if (text == "nt" || text == "NT") return PseudoFamily::NT;
  if (text == "nh" || text == "NH") return PseudoFamily::NH;
  if (text == "ne" || text == "NE") return PseudoFamily::NE;
  throw ParameterDomainError("unknown pseudo family '" + std::string(text) + "' (expected nt, nh or ne)");
}

Eigen::VectorXd FrontierSpec::design_row(const Eigen::Ref<const Eigen::VectorXd>& inputs) const {
  Eigen::VectorXd row(num_coefficients());
  if (has_intercept) {
    row(0) = 1.0;
    row.tail(num_inputs) = inputs;
  } else {
    row = inputs;
  }
  return row;
}

double Theta::sigma() const { return std::hypot(sigma_v, sigma_u); }

int parameter_dim(PseudoFamily family, int num_coefficients) {
  return num_coefficients + (family == PseudoFamily::NT ? 3 : 2);
}

Eigen::VectorXd pack(PseudoFamily family, const Theta& theta) {
  const int q = static_cast<int>(theta.beta.size());
  Eigen::VectorXd out(parameter_dim(family, q));
  out.head(q) = theta.beta;
  int k = q;
  if (family == PseudoFamily::NT) out(k++) = theta.mu;
  out(k++) = theta.sigma_v;
  out(k) = theta.sigma_u;
  return out;
}

Theta unpack(PseudoFamily family, const Eigen::Ref<const Eigen::VectorXd>& packed, int num_coefficients) {
  if (packed.size() != parameter_dim(family, num_coefficients))
    throw ParameterDomainError("unpack: packed parameter vector has the wrong length");
  Theta theta;
  theta.beta = packed.head(num_coefficients);
  int k = num_coefficients;
  theta.mu = family == PseudoFamily::NT ? packed(k++) : 0.0;
  theta.sigma_v = packed(k++);
  theta.sigma_u = packed(k);
  return theta;
}

void validate_theta(PseudoFamily family, const Theta& theta) {
  if (!(theta.sigma_v >= kSigmaFloor) || !(theta.sigma_u >= kSigmaFloor) || !std::isfinite(theta.sigma_v) ||
      !std::isfinite(theta.sigma_u))
    throw ParameterDomainError("theta: sigma_v and sigma_u must be finite and >= 1e-4");
  if (!theta.beta.allFinite()) throw ParameterDomainError("theta: beta must be finite");
  if (!std::isfinite(theta.mu)) throw ParameterDomainError("theta: mu must be finite");
  if (family != PseudoFamily::NT && theta.mu != 0.0)
    throw ParameterDomainError("theta: mu is only a parameter of the NT family");
}

namespace {

ResidualScore truncated_normal_score(const Theta& t, double e, bool with_mu) {
  const double sv = t.sigma_v;
  const double su = t.sigma_u;
  const double s2 = sv * sv + su * su;
  const double s = std::sqrt(s2);
  const double mu = with_mu ? t.mu : 0.0;

  const double d1 = (e + mu) / s;
  const double num = mu * sv / su - e * su / sv;
  const double d2 = num / s;
  const double log_a = with_mu ? log_std_normal_cdf(mu / su) : -std::numbers::ln2;
  const double m2 = mills_ratio(d2);

  ResidualScore r;
  r.log_f = -std::log(s) - log_a + log_std_normal_pdf(d1) + log_std_normal_cdf(d2);
  r.d_g = (d1 + (su / sv) * m2) / s;

  const double d2_dsv = (mu / su + e * su / (sv * sv)) / s - num * sv / (s2 * s);
  const double d2_dsu = (-mu * sv / (su * su) - e / sv) / s - num * su / (s2 * s);
  r.d_sigma_v = (d1 * d1 - 1.0) * sv / s2 + m2 * d2_dsv;
  r.d_sigma_u = (d1 * d1 - 1.0) * su / s2 + m2 * d2_dsu;
  if (with_mu) {
    const double ma = mills_ratio(mu / su);
    r.d_mu = -ma / su - d1 / s + m2 * sv / (su * s);
    r.d_sigma_u += ma * mu / (su * su);
  } else {
    r.d_mu = 0.0;
  }
  return r;
}

ResidualScore exponential_score(const Theta& t, double e) {
  const double sv = t.sigma_v;
  const double su = t.sigma_u;
  const double xi = -e / sv - sv / su;
  const double m = mills_ratio(xi);

  ResidualScore r;
  r.log_f = -std::log(su) + log_std_normal_cdf(xi) + e / su + sv * sv / (2.0 * su * su);
  r.d_g = m / sv - 1.0 / su;
  r.d_mu = 0.0;
  r.d_sigma_v = m * (e / (sv * sv) - 1.0 / su) + sv / (su * su);
  r.d_sigma_u = -1.0 / su + m * sv / (su * su) + (sv / (su * su)) * xi;
  return r;
}

}  // namespace

ResidualScore residual_score(PseudoFamily family, const Theta& theta, double residual) {
  switch (family) {
    case PseudoFamily::NT: return truncated_normal_score(theta, residual, true);
    case PseudoFamily::NH: return truncated_normal_score(theta, residual, false);
    case PseudoFamily::NE: return exponential_score(theta, residual);
  }
  return {};
}

double inefficiency_mean(PseudoFamily family, const Theta& theta) {
  switch (family) {
    case PseudoFamily::NT: return theta.mu + theta.sigma_u * mills_ratio(theta.mu / theta.sigma_u);
    case PseudoFamily::NH: return theta.sigma_u * std::sqrt(2.0 / std::numbers::pi);
    case PseudoFamily::NE: return theta.sigma_u;
  }
  return 0.0;
}

double log_density(PseudoFamily family, const Theta& theta, const Eigen::Ref<const Eigen::VectorXd>& design_row,
                   double y) {
  validate_theta(family, theta);
  return residual_score(family, theta, y - theta.beta.dot(design_row)).log_f;
}

Eigen::VectorXd log_density_gradient(PseudoFamily family, const Theta& theta,
                                     const Eigen::Ref<const Eigen::VectorXd>& design_row, double y) {
  validate_theta(family, theta);
  const int q = static_cast<int>(theta.beta.size());
  const ResidualScore r = residual_score(family, theta, y - theta.beta.dot(design_row));
  Eigen::VectorXd g(parameter_dim(family, q));
  g.head(q) = r.d_g * design_row;
  int k = q;
  if (family == PseudoFamily::NT) g(k++) = r.d_mu;
  g(k++) = r.d_sigma_v;
  g(k) = r.d_sigma_u;
  return g;
}

Eigen::VectorXd density_gradient(PseudoFamily family, const Theta& theta,
                                 const Eigen::Ref<const Eigen::VectorXd>& design_row, double y) {
  const double f = std::exp(log_density(family, theta, design_row, y));
  return f * log_density_gradient(family, theta, design_row, y);
}

double density_upper_bound(PseudoFamily family, const ParameterBox& box) {
  if (!(box.sigma_lo >= kSigmaFloor) || !(box.sigma_hi >= box.sigma_lo))
    throw ParameterDomainError("density_upper_bound: need 1e-4 <= sigma_lo <= sigma_hi");
  const double lo = box.sigma_lo;
  const double hi = box.sigma_hi;
  switch (family) {
    case PseudoFamily::NH:
      return 2.0 * std_normal_pdf(0.0) / lo;
    case PseudoFamily::NT: {
      const double mu_max = std::max(std::abs(box.mu_lo), std::abs(box.mu_hi));
      // 1 - Phi(a) = Phi(-a)
      return std::exp(-std::log(lo) - log_std_normal_cdf(-mu_max / lo)) * std_normal_pdf(0.0);
    }
    case PseudoFamily::NE: {
      // sup_{z>0} Phi(-z/hi) exp(z/lo): the log is concave in z; the maximizer
      // solves mills_ratio(-z/hi) = hi/lo.
      const double target = hi / lo;
      double a = 0.0;
      double b = target + 10.0;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (a + b);
        if (mills_ratio(-mid) < target) a = mid; else b = mid;
      }
      const double t = 0.5 * (a + b);
      const double log_sup = log_std_normal_cdf(-t) + t * hi / lo;
      const double log_bracket = log_sup > 0.0 ? log_sup + std::log1p(std::exp(-log_sup)) : std::log1p(std::exp(log_sup));
      return std::exp(-std::log(lo) + (hi * hi) / (lo * lo) + log_bracket);
    }
  }
  return 0.0;
}

}  // namespace mdpdsf
