#include "mdpdsf/robustness.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mdpdsf/efficiency.hpp"
#include "mdpdsf/errors.hpp"

namespace mdpdsf {

std::string to_string(ContaminationKind kind) {
  switch (kind) {
    case ContaminationKind::None:
      return "none";
    case ContaminationKind::Upward:
      return "up";
    case ContaminationKind::Downward:
      return "down";
  }
  return "none";
}

ContaminationKind parse_contamination(const std::string& name) {
  if (name == "none") return ContaminationKind::None;
  if (name == "up" || name == "upward") return ContaminationKind::Upward;
  if (name == "down" || name == "downward") return ContaminationKind::Downward;
  throw ParameterDomainError("unknown contamination '" + name + "' (expected none, up or down)");
}

Theta SimConfig::default_truth() {
  Theta t;
  t.beta = Eigen::Vector2d(5.0, 5.0);
  t.sigma_v = std::sqrt(0.75);
  t.sigma_u = 1.0;
  return t;
}

std::vector<Alpha> SimConfig::default_alpha_list() {
  return {Alpha(0.0), Alpha(0.05), Alpha(0.1), Alpha(0.2), Alpha(0.3), Alpha(0.5), Alpha(0.75), Alpha(1.0)};
}

void validate_sim_config(const SimConfig& c) {
  if (c.n < 4) throw ParameterDomainError("simulation: n must be at least 4");
  if (c.replications < 1) throw ParameterDomainError("simulation: replications must be at least 1");
  if (c.truth.beta.size() < 2) throw ParameterDomainError("simulation: truth needs an intercept and a slope");
  validate_theta(c.family, c.truth);
  if (c.contamination.n_outliers < 0 ||
      (c.contamination.kind != ContaminationKind::None && c.contamination.n_outliers >= c.n))
    throw ParameterDomainError("simulation: need 0 <= n_outliers < n");
  if (c.alpha_list.empty()) throw ParameterDomainError("simulation: alpha_list is empty");
  if (!(c.alpha_list.front() == Alpha(0.0))) throw ParameterDomainError("simulation: alpha_list must start at 0");
  for (std::size_t i = 1; i < c.alpha_list.size(); ++i)
    if (!(c.alpha_list[i - 1] < c.alpha_list[i]))
      throw ParameterDomainError("simulation: alpha_list must be strictly ascending");
}

namespace {

double draw_u(PseudoFamily family, const Theta& t, RngStream& rng) {
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

std::vector<int> choose_rows(int n, int k, RngStream& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

void check_outliers(const Dataset& data, int n_outliers) {
  if (n_outliers < 0 || n_outliers > data.size()) throw ParameterDomainError("contaminate: need 0 <= n_o <= n");
}

std::vector<std::string> parameter_names(PseudoFamily family, int q) {
  std::vector<std::string> names;
  for (int j = 0; j < q; ++j) names.push_back("beta" + std::to_string(j));
  if (family == PseudoFamily::NT) names.push_back("mu");
  for (const char* s : {"sigma_sq", "gamma", "sigma_v_sq", "sigma_u_sq"}) names.push_back(s);
  return names;
}

std::vector<double> reported_values(PseudoFamily family, const Theta& t) {
  std::vector<double> v(t.beta.data(), t.beta.data() + t.beta.size());
  if (family == PseudoFamily::NT) v.push_back(t.mu);
  v.push_back(t.sigma_sq());
  v.push_back(t.lambda());
  v.push_back(t.sigma_v * t.sigma_v);
  v.push_back(t.sigma_u * t.sigma_u);
  return v;
}

struct EstimatorDraw {
  std::vector<double> values;
  double d = 0.0;
  double mse_te = 0.0;
  bool boundary = false;
};

struct ReplicationOutcome {
  bool ok = false;
  std::vector<EstimatorDraw> draws;
};

ReplicationOutcome run_replication(const SimConfig& config, int rep) {
  ReplicationOutcome out;
  RngStream rng(config.seed, static_cast<std::uint64_t>(rep));
  Dataset data = generate_clean(config, rng);
  const Contamination& c = config.contamination;
  if (c.kind == ContaminationKind::Upward) data = contaminate_upward(data, c.n_outliers, c.p_v, config.truth, rng);
  if (c.kind == ContaminationKind::Downward) data = contaminate_downward(data, c.n_outliers, rng);

  FitOptions opts = config.fit;
  opts.alpha_path = config.alpha_list;
  opts.compute_covariance = false;
  opts.seed = config.seed + static_cast<std::uint64_t>(rep);
  const std::vector<FitResult> fits = fit_alpha_path(data, config.family, opts);
  for (const FitResult& f : fits) {
    if (!f.converged) return out;
    EstimatorDraw d;
    d.values = reported_values(config.family, f.theta_hat);
    d.d = metric_d(f.theta_hat, config.truth);
    d.mse_te = mse_te(technical_efficiency(f, data), data.true_u);
    d.boundary = f.boundary_flag;
    out.draws.push_back(std::move(d));
  }
  out.ok = true;
  return out;
}

}  // namespace

Dataset generate_clean(const SimConfig& config, RngStream& rng) {
  const Theta& t = config.truth;
  const int p = static_cast<int>(t.beta.size()) - 1;
  Eigen::MatrixXd x(config.n, p);
  Eigen::VectorXd y(config.n);
  Eigen::VectorXd u(config.n);
  for (int i = 0; i < config.n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = rng.uniform();
    u(i) = draw_u(config.family, t, rng);
    const double v = t.sigma_v * rng.standard_normal();
    y(i) = t.beta(0) + x.row(i).dot(t.beta.tail(p)) + v - u(i);
  }
  Dataset d = Dataset::from_columns(std::move(x), std::move(y), true);
  d.true_u = std::move(u);
  return d;
}

Dataset contaminate_upward(const Dataset& data, int n_outliers, double p_v, const Theta& truth, RngStream& rng) {
  check_outliers(data, n_outliers);
  if (truth.beta.size() != data.design.cols())
    throw ParameterDomainError("contaminate_upward: truth does not match the frontier");
  Dataset out = data;
  if (out.true_u.size() != out.size()) out.true_u = Eigen::VectorXd::Constant(out.size(), std::nan(""));
  for (int i : choose_rows(data.size(), n_outliers, rng)) {
    for (int j = 0; j < out.num_inputs(); ++j) out.inputs(i, j) = rng.uniform();
    out.design.row(i) = out.frontier.design_row(out.inputs.row(i).transpose()).transpose();
    out.y(i) = out.design.row(i).dot(truth.beta) + p_v * truth.sigma_v;
    out.true_u(i) = 0.0;
  }
  return out;
}

Dataset contaminate_downward(const Dataset& data, int n_outliers, RngStream& rng) {
  check_outliers(data, n_outliers);
  Dataset out = data;
  if (out.true_u.size() != out.size()) out.true_u = Eigen::VectorXd::Constant(out.size(), std::nan(""));
  for (int i : choose_rows(data.size(), n_outliers, rng)) {
    for (int j = 0; j < out.num_inputs(); ++j) out.inputs(i, j) = rng.uniform();
    out.design.row(i) = out.frontier.design_row(out.inputs.row(i).transpose()).transpose();
    out.y(i) = 0.5 + 0.5 * rng.uniform();
    out.true_u(i) = std::nan("");
  }
  return out;
}

double metric_d(const Theta& theta_hat, const Theta& truth) {
  if (theta_hat.beta.size() != truth.beta.size()) throw ParameterDomainError("metric_d: beta length mismatch");
  double sum = 0.0;
  const auto add = [&](double est, double tru) {
    if (tru == 0.0) throw UndefinedMetricError("metric_d: a true component is zero");
    const double r = (est - tru) / tru;
    sum += r * r;
  };
  for (Eigen::Index j = 0; j < truth.beta.size(); ++j) add(theta_hat.beta(j), truth.beta(j));
  add(theta_hat.sigma_v * theta_hat.sigma_v, truth.sigma_v * truth.sigma_v);
  add(theta_hat.sigma_u * theta_hat.sigma_u, truth.sigma_u * truth.sigma_u);
  return std::sqrt(sum);
}

Eigen::MatrixXd influence_curve(const FitResult& fit, const Eigen::VectorXd& x0, const Eigen::VectorXd& y0_grid,
                                const QuadratureConfig& quad) {
  if (!fit.converged) throw NonConvergenceError("influence_curve: fit did not converge");
  if (fit.j.size() == 0) throw SingularInformationError("influence_curve: fit carries no information matrix");
  if (x0.size() != fit.frontier.num_inputs) throw ParameterDomainError("influence_curve: x0 has the wrong length");
  const Eigen::LLT<Eigen::MatrixXd> llt(fit.j);
  if (llt.info() != Eigen::Success) throw SingularInformationError("influence_curve: J is not positive definite");
  const Eigen::VectorXd row = fit.frontier.design_row(x0);
  Eigen::MatrixXd out(y0_grid.size(), fit.j.rows());
  for (Eigen::Index k = 0; k < y0_grid.size(); ++k) {
    const Eigen::VectorXd g = h_alpha_gradient(fit.family, fit.theta_hat, row, y0_grid(k), fit.alpha, quad);
    out.row(k) = (-llt.solve(g)).transpose();
  }
  return out;
}

SimReport run_simulation(const SimConfig& config) {
  validate_sim_config(config);
  const auto start = std::chrono::steady_clock::now();
  const int reps = config.replications;
  std::vector<ReplicationOutcome> outcomes(static_cast<std::size_t>(reps));
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < reps; ++r) {
    try {
      outcomes[static_cast<std::size_t>(r)] = run_replication(config, r);
    } catch (const std::exception&) {
      outcomes[static_cast<std::size_t>(r)].ok = false;
    }
  }

  SimReport report;
  report.config = config;
  for (const ReplicationOutcome& o : outcomes) (o.ok ? report.completed : report.failed)++;
  if (report.failed > 0.02 * reps)
    throw NumericalError("run_simulation: " + std::to_string(report.failed) + " of " + std::to_string(reps) +
                         " replications failed");
  if (report.completed < 1) throw NumericalError("run_simulation: no replication completed");

  const int q = static_cast<int>(config.truth.beta.size());
  const std::vector<std::string> names = parameter_names(config.family, q);
  const std::vector<double> truth = reported_values(config.family, config.truth);
  const double count = report.completed;
  for (std::size_t a = 0; a < config.alpha_list.size(); ++a) {
    EstimatorSummary s;
    s.alpha = config.alpha_list[a];
    for (std::size_t k = 0; k < names.size(); ++k) {
      ParameterSummary ps;
      ps.name = names[k];
      ps.truth = truth[k];
      double sum = 0.0, sq_err = 0.0;
      for (const ReplicationOutcome& o : outcomes) {
        if (!o.ok) continue;
        const double v = o.draws[a].values[k];
        sum += v;
        sq_err += (v - ps.truth) * (v - ps.truth);
      }
      ps.mean = sum / count;
      ps.mse = sq_err / count;
      double ss = 0.0;
      for (const ReplicationOutcome& o : outcomes)
        if (o.ok) ss += (o.draws[a].values[k] - ps.mean) * (o.draws[a].values[k] - ps.mean);
      ps.sd = count > 1 ? std::sqrt(ss / (count - 1)) : 0.0;
      s.parameters.push_back(ps);
    }
    double d_sum = 0.0, te_sum = 0.0;
    for (const ReplicationOutcome& o : outcomes) {
      if (!o.ok) continue;
      d_sum += o.draws[a].d;
      te_sum += o.draws[a].mse_te;
      s.boundary_count += o.draws[a].boundary ? 1 : 0;
    }
    s.mean_d = d_sum / count;
    s.mse_te = te_sum / count;
    report.estimators.push_back(std::move(s));
  }
  const double base = report.estimators.front().mean_d;
  for (EstimatorSummary& s : report.estimators) s.ratio_d = s.mean_d / base;
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace mdpdsf
