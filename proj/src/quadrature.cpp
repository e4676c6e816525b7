#include "mdpdsf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mdpdsf/errors.hpp"

namespace mdpdsf {

namespace {

// Kronrod 15-point abscissae and weights, Gauss 7-point weights on the
// odd-indexed abscissae (QUADPACK qk15).
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  QuadVector value;
  QuadVector error;
  QuadVector abs_value;
};

Panel gauss_kronrod(const std::function<QuadVector(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const QuadVector fc = f(center);
  QuadVector kronrod = kWgk[7] * fc;
  QuadVector gauss = kWg[3] * fc;
  QuadVector abs_sum = kWgk[7] * fc.cwiseAbs();
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const QuadVector f1 = f(center - dx);
    const QuadVector f2 = f(center + dx);
    kronrod += kWgk[j] * (f1 + f2);
    abs_sum += kWgk[j] * (f1.cwiseAbs() + f2.cwiseAbs());
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  Panel p{a, b, kronrod * half, ((kronrod - gauss) * half).cwiseAbs(), abs_sum * std::abs(half)};
  return p;
}

}  // namespace

void validate_quadrature(const QuadratureConfig& config) {
  if (!(config.rel_tol > 0.0) || config.rel_tol > 1e-8)
    throw ParameterDomainError("quadrature: rel_tol must lie in (0, 1e-8]");
  if (!(config.abs_tol > 0.0)) throw ParameterDomainError("quadrature: abs_tol must be positive");
  if (!(config.window_halfwidth_sigmas >= 10.0))
    throw ParameterDomainError("quadrature: window_halfwidth_sigmas must be >= 10");
  if (config.max_subdivisions < 1) throw ParameterDomainError("quadrature: max_subdivisions must be >= 1");
}

QuadResult integrate_adaptive(const std::function<QuadVector(double)>& integrand, std::span<const double> breakpoints,
                              const QuadratureConfig& config) {
  if (breakpoints.size() < 2) throw ParameterDomainError("integrate_adaptive: need at least two breakpoints");

  std::vector<Panel> panels;
  panels.reserve(breakpoints.size() + static_cast<std::size_t>(config.max_subdivisions));
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (breakpoints[i + 1] > breakpoints[i]) panels.push_back(gauss_kronrod(integrand, breakpoints[i], breakpoints[i + 1]));
  }
  if (panels.empty()) throw ParameterDomainError("integrate_adaptive: empty integration range");

  QuadResult result;
  for (;;) {
    QuadVector total = QuadVector::Zero();
    QuadVector err = QuadVector::Zero();
    QuadVector scale = QuadVector::Zero();
    for (const Panel& p : panels) {
      total += p.value;
      err += p.error;
      scale += p.abs_value;
    }
    const QuadVector tol = (config.rel_tol * scale).cwiseMax(config.abs_tol);
    result.value = total;
    result.error = err;
    if ((err.array() <= tol.array()).all()) return result;
    if (result.subdivisions >= config.max_subdivisions) {
      throw NumericalError("quadrature did not converge within " + std::to_string(config.max_subdivisions) +
                               " subdivisions (achieved error " + std::to_string(err.maxCoeff()) + ")",
                           err.maxCoeff());
    }
    // Bisect the panel contributing the most error relative to the tolerance.
    std::size_t worst = 0;
    double worst_ratio = -1.0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      const double ratio = (panels[i].error.array() / tol.array()).maxCoeff();
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        worst = i;
      }
    }
    const Panel old = panels[worst];
    const double mid = 0.5 * (old.a + old.b);
    panels[worst] = gauss_kronrod(integrand, old.a, mid);
    panels.push_back(gauss_kronrod(integrand, mid, old.b));
    ++result.subdivisions;
  }
}

}  // namespace mdpdsf
