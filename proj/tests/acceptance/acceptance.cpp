// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "../support.hpp"
#include "mdpdsf/alpha_select.hpp"
#include "mdpdsf/cli_io.hpp"
#include "mdpdsf/efficiency.hpp"
#include "mdpdsf/mdpd_objective.hpp"
#include "mdpdsf/robustness.hpp"

using namespace mdpdsf;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const EstimatorSummary& at(const SimReport& r, double alpha) {
  for (const EstimatorSummary& e : r.estimators)
    if (e.alpha.value() == alpha) return e;
  throw std::runtime_error("alpha not in report");
}

double mean_of(const EstimatorSummary& e, const std::string& name) {
  for (const ParameterSummary& p : e.parameters)
    if (p.name == name) return p.mean;
  throw std::runtime_error("parameter not in report");
}

SimConfig table_config(ContaminationKind kind) {
  SimConfig c;  // n = 500, 200 replications, truth (5, 5, 0.75, 1)
  c.contamination = {kind, kind == ContaminationKind::None ? 0 : 3, 5.0};
  return c;
}

void criterion1() {
  const SimReport r = run_simulation(table_config(ContaminationKind::None));
  const EstimatorSummary& ml = at(r, 0.0);
  const double ratio = at(r, 0.1).ratio_d;
  const bool ok = ml.mean_d >= 0.35 && ml.mean_d <= 0.46 && ratio >= 0.90 && ratio <= 1.10 && ml.mse_te >= 0.05 &&
                  ml.mse_te <= 0.075;
  report(1, ok,
         fmt("clean, %d reps: MLE mean_d %.3f in [0.35,0.46]; ratio_d(0.1) %.3f in [0.90,1.10]; MSE_TE(MLE) %.3f in "
             "[0.05,0.075]",
             r.completed, ml.mean_d, ratio, ml.mse_te));
}

void criterion2() {
  const SimReport r = run_simulation(table_config(ContaminationKind::Upward));
  const EstimatorSummary& ml = at(r, 0.0);
  const EstimatorSummary& md = at(r, 0.3);
  const double su2 = mean_of(ml, "sigma_u_sq"), b0 = mean_of(ml, "beta0");
  const bool ok = su2 <= 0.15 && b0 <= 4.5 && md.ratio_d >= 0.28 && md.ratio_d <= 0.52 && ml.mse_te >= 3.0 * md.mse_te;
  report(2, ok,
         fmt("upward n_o=3 p_v=5, %d reps: MLE sigma_u^2 %.3f <= 0.15; MLE beta0 %.3f <= 4.5; ratio_d(0.3) %.3f in "
             "[0.28,0.52]; MSE_TE %.3f >= 3 x %.3f",
             r.completed, su2, b0, md.ratio_d, ml.mse_te, md.mse_te));
}

void criterion3() {
  const SimReport r = run_simulation(table_config(ContaminationKind::Downward));
  const EstimatorSummary& ml = at(r, 0.0);
  const double ratio = at(r, 0.3).ratio_d;
  const double su2 = mean_of(ml, "sigma_u_sq"), b0 = mean_of(ml, "beta0");
  const bool ok = su2 >= 1.5 && b0 >= 5.15 && ratio >= 0.27 && ratio <= 0.55;
  report(3, ok,
         fmt("downward n_o=3, %d reps: MLE sigma_u^2 %.3f >= 1.5; MLE beta0 %.3f >= 5.15; ratio_d(0.3) %.3f in "
             "[0.27,0.55]",
             r.completed, su2, b0, ratio));
}

Eigen::VectorXd row_of(double x) { return FrontierSpec{true, 1}.design_row(Eigen::VectorXd::Constant(1, x)); }

void criterion4() {
  QuadratureConfig tight;
  tight.rel_tol = 1e-13;
  tight.abs_tol = 1e-16;
  tight.max_subdivisions = 4000;
  const PseudoFamily fams[] = {PseudoFamily::NT, PseudoFamily::NH, PseudoFamily::NE};
  RngStream rng(4, 0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const PseudoFamily fam = fams[i % 3];
    const Theta t = testsupport::random_theta(fam, 2, rng);
    const Alpha a(rng.uniform());
    const Eigen::VectorXd row = row_of(rng.uniform());
    const double y = t.beta.dot(row) + (-3.0 + 4.0 * rng.uniform()) * t.sigma();
    const Eigen::VectorXd p = pack(fam, t);
    const auto h = [&](const Eigen::VectorXd& z) { return h_alpha(fam, unpack(fam, z, 2), row, y, a, tight); };
    const Eigen::VectorXd g = h_alpha_gradient(fam, t, row, y, a, tight);
    Eigen::VectorXd num(p.size());
    for (int c = 0; c < p.size(); ++c)
      num(c) = testsupport::richardson_diff(h, p, c, 1e-3 * std::max(1.0, std::abs(p(c))));
    worst = std::max(worst, (g - num).lpNorm<Eigen::Infinity>() / num.lpNorm<Eigen::Infinity>());
  }
  report(4, worst <= 1e-5, fmt("100 random (family, theta, x, y, alpha): max relative error %.2e <= 1e-5", worst));
}

void criterion5() {
  const PseudoFamily fams[] = {PseudoFamily::NT, PseudoFamily::NH, PseudoFamily::NE};
  RngStream rng(5, 0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const PseudoFamily fam = fams[i % 3];
    Theta t = testsupport::random_theta(fam, 2, rng);
    t.sigma_u *= std::pow(10.0, -2.0 + 4.0 * rng.uniform());
    worst = std::max(worst, std::abs(power_integral(fam, t, row_of(rng.uniform()), Alpha(0.0), {}) - 1.0));
  }
  Theta t;
  t.beta = Eigen::Vector2d(0.0, 0.0);
  t.sigma_v = t.sigma_u = 1.0 / std::sqrt(2.0);
  const double o1 = 0.3431251243346547;  // trapezoid, step 1e-4 on +-15 sigma
  const double got = power_integral(PseudoFamily::NH, t, row_of(0.0), Alpha(1.0), {});
  report(5, worst <= 1e-8 && std::abs(got - o1) <= 1e-7,
         fmt("alpha=0 max |I-1| %.2e <= 1e-8 over 100 configs; NH alpha=1 %.16f vs O1 %.16f (diff %.1e <= 1e-7)",
             worst, got, o1, std::abs(got - o1)));
}

void criterion6() {
  const PseudoFamily fams[] = {PseudoFamily::NT, PseudoFamily::NH, PseudoFamily::NE};
  RngStream rng(6, 0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const PseudoFamily fam = fams[i % 3];
    const Theta t = testsupport::random_theta(fam, 2, rng);
    const Eigen::VectorXd row = row_of(rng.uniform());
    const double y = t.beta.dot(row) + (-3.0 + 4.0 * rng.uniform()) * t.sigma();
    const double gap = h_alpha(fam, t, row, y, Alpha(1e-4), {}) + 1e4 - h_alpha(fam, t, row, y, Alpha(0.0), {});
    worst = std::max(worst, std::abs(gap));
  }
  report(6, worst <= 2e-3, fmt("alpha=1e-4, 20 points: max |(H_a + 1/a) - H_0| = %.2e <= 2e-3", worst));
}

void criterion7() {
  const Dataset d = testsupport::baseline_sample(500, 7);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, 0.5);
  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(2001, -100.0, 100.0);
  const FitResult robust = fit_mdpd(d, PseudoFamily::NH, Alpha(0.3), {});
  const FitResult ml = fit_mdpd(d, PseudoFamily::NH, Alpha(0.0), {});
  if (!robust.covariance_available || !ml.covariance_available) {
    report(7, false, "fit without information matrix");
    return;
  }
  const Eigen::VectorXd nr = influence_curve(robust, x0, grid).rowwise().norm();
  Eigen::Index arg = 0;
  const double peak = nr.maxCoeff(&arg);
  const double edge = std::max(nr(0), nr(nr.size() - 1));
  const bool bounded = std::abs(grid(arg)) < 20.0 && edge <= 1.05 * peak;

  const double g = ml.theta_hat.beta.dot(ml.frontier.design_row(x0));
  const double sigma = ml.theta_hat.sigma();
  const Eigen::VectorXd near_grid = Eigen::VectorXd::LinSpaced(41, g - 2.0 * sigma, g + 2.0 * sigma);
  const double near = influence_curve(ml, x0, near_grid).rowwise().norm().maxCoeff();
  const Eigen::VectorXd far = influence_curve(ml, x0, Eigen::Vector2d(-100.0, 100.0)).rowwise().norm();
  const bool unbounded = far.minCoeff() >= 5.0 * near;
  report(7, bounded && unbounded,
         fmt("alpha=0.3: peak |IF| %.3f at y0=%.1f, |IF(+-100)| max %.3f <= 1.05 x peak; alpha=0: |IF(-100)| %.1f, "
             "|IF(100)| %.1f >= 5 x near-frontier max %.3f",
             peak, grid(arg), edge, far(0), far(1), near));
}

void criterion8() {
  int robust = 0, clean_zero = 0;
  const int runs = 20;
  for (int s = 0; s < runs; ++s) {
    const Dataset d = testsupport::firm_sample(100 + s);
    const Dataset cleaned = testsupport::drop_studentized_outliers(d);
    const AlphaSelection a = select_alpha(d, PseudoFamily::NH, Alpha(0.5), default_alpha_grid(), 99, 1000 + s);
    const AlphaSelection b = select_alpha(cleaned, PseudoFamily::NH, Alpha(0.5), default_alpha_grid(), 99, 1000 + s);
    if (!a.steps.front().accept && a.alpha.value() >= 0.2) ++robust;
    if (b.alpha.value() == 0.0) ++clean_zero;
  }
  report(8, robust >= 16 && clean_zero >= 16,
         fmt("contaminated: reject at 0 and select >= 0.2 in %d/%d (need 16); cleaned: select 0 in %d/%d (need 16)",
             robust, runs, clean_zero, runs));
}

void criterion9() {
  Theta t;
  t.beta = Eigen::Vector2d(0.0, 0.0);
  t.sigma_v = t.sigma_u = 1.0;
  const double te = te_score(PseudoFamily::NH, t, 0.0);
  // 2 Phi(-1/sqrt 2) exp(1/4) in 40-digit arithmetic.
  const double exact = 0.6156903441929259;

  // Monte Carlo E[exp(-U) | V - U = 0]: U half-normal weighted by phi(U).
  RngStream rng(9, 0);
  const int draws = 10'000'000;
  double sw = 0.0, swx = 0.0, sww = 0.0, swwx = 0.0, swwxx = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double u = sample_half_normal(1.0, rng);
    const double w = std::exp(-0.5 * u * u);
    const double x = std::exp(-u);
    sw += w;
    swx += w * x;
    sww += w * w;
    swwx += w * w * x;
    swwxx += w * w * x * x;
  }
  const double mc = swx / sw;
  const double se = std::sqrt(swwxx - 2.0 * mc * swwx + mc * mc * sww) / sw;
  const bool ok = std::abs(te - exact) <= 1e-6 && std::abs(te - mc) <= 4.0 * se;
  report(9, ok,
         fmt("te(e=0, sigma_v^2=sigma_u^2=1) = %.10f; closed-form oracle %.10f (diff %.1e <= 1e-6); Monte Carlo "
             "(1e7 draws) %.6f +- %.1e",
             te, exact, std::abs(te - exact), mc, se));
  std::printf("  note: the criterion quotes 0.61572; the exact value is 0.6156903 (difference %.2e), so the "
              "check uses the oracle value.\n",
              0.61572 - exact);
}

void criterion10() {
  SimConfig c = table_config(ContaminationKind::Upward);
  c.replications = 40;
  const std::string a = sim_report_to_json(run_simulation(c)).dump();
  const std::string b = sim_report_to_json(run_simulation(c)).dump();
  report(10, a == b, fmt("two runs of the same SimConfig: %zu-byte reports %s", a.size(),
                         a == b ? "identical" : "differ"));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                    criterion6, criterion7, criterion8, criterion9, criterion10};
  for (const auto& c : criteria) {
    try {
      c();
    } catch (const std::exception& e) {
      std::printf("FAIL (exception) %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
