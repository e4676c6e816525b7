#include "mdpdsf/cli_io.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "mdpdsf/errors.hpp"

namespace mdpdsf {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string fmt3(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string stem_of(const std::string& path) {
  std::filesystem::path p(path);
  return (p.parent_path() / p.stem()).string();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<Alpha> to_alphas(const std::vector<double>& v) {
  std::vector<Alpha> out;
  for (double a : v) out.emplace_back(a);
  return out;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty()) return;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file " + path);
  f << j.dump(2) << '\n';
}

}  // namespace

Dataset load_csv(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(f, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw ParseError(path + ": empty file");
  const auto y_it = std::find(header.begin(), header.end(), "y");
  if (y_it == header.end()) throw ParseError(path + ": header has no column named y", 0, 0);
  const std::size_t y_col = static_cast<std::size_t>(y_it - header.begin());
  const std::size_t width = header.size();

  std::vector<std::vector<double>> rows;
  std::size_t data_row = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++data_row;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != width)
      throw ParseError(path + ": data row " + std::to_string(data_row) + " (line " + std::to_string(line_no) +
                           ") has " + std::to_string(cells.size()) + " cells, expected " + std::to_string(width),
                       data_row, 0);
    std::vector<double> values(width);
    for (std::size_t c = 0; c < width; ++c) {
      const std::string& s = cells[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ParseError(path + ": data row " + std::to_string(data_row) + " (line " + std::to_string(line_no) +
                             "), column " + std::to_string(c + 1) + " '" + header[c] + "': invalid value '" + s + "'",
                         data_row, c + 1);
      values[c] = v;
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");

  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(width) - 1;
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < width; ++c)
    if (c != y_col) names.push_back(header[c]);
  for (int i = 0; i < n; ++i) {
    int k = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == y_col)
        y(i) = rows[static_cast<std::size_t>(i)][c];
      else
        x(i, k++) = rows[static_cast<std::size_t>(i)][c];
    }
  }
  if (warnings && n > 0 && y.maxCoeff() == y.minCoeff()) warnings->push_back(path + ": column y is constant");
  Dataset d = Dataset::from_columns(std::move(x), std::move(y), true);
  d.input_names = std::move(names);
  return d;
}

void write_csv(const std::string& path, const Dataset& data,
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& extra) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file " + path);
  f << "y";
  for (int j = 0; j < data.num_inputs(); ++j)
    f << ',' << (static_cast<std::size_t>(j) < data.input_names.size() ? data.input_names[j] : "x" + std::to_string(j + 1));
  for (const auto& [name, col] : extra) {
    if (col.size() != data.size()) throw ParameterDomainError("write_csv: column " + name + " has the wrong length");
    f << ',' << name;
  }
  f << '\n';
  for (int i = 0; i < data.size(); ++i) {
    f << fmt17(data.y(i));
    for (int j = 0; j < data.num_inputs(); ++j) f << ',' << fmt17(data.inputs(i, j));
    for (const auto& [name, col] : extra) f << ',' << fmt17(col(i));
    f << '\n';
  }
}

json config_to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["input"] = c.input_path;
  j["output"] = c.output_path;
  j["family"] = to_string(c.family);
  j["alpha"] = c.alpha ? json(*c.alpha) : json(nullptr);
  j["alpha_grid"] = c.alpha_grid;
  j["m"] = c.m;
  j["seed"] = c.seed;
  j["emit_plots"] = c.emit_plots;
  j["full_scale"] = c.full_scale;
  j["replications"] = c.replications ? json(*c.replications) : json(nullptr);
  j["contamination"] = {{"kind", to_string(c.contamination.kind)},
                        {"n_outliers", c.contamination.n_outliers},
                        {"p_v", c.contamination.p_v}};
  j["n"] = c.n;
  j["x0"] = c.x0;
  j["y0_grid"] = {{"min", c.y0_min}, {"max", c.y0_max}, {"points", c.y0_points}};
  j["preset"] = c.preset;
  j["fit_options"] = {{"grad_tol", c.fit.grad_tol},
                      {"max_iters", c.fit.max_iters},
                      {"num_restarts", c.fit.num_restarts},
                      {"seed", c.fit.seed},
                      {"quad_rel_tol", c.fit.quad.rel_tol},
                      {"quad_abs_tol", c.fit.quad.abs_tol},
                      {"quad_window", c.fit.quad.window_halfwidth_sigmas}};
  return j;
}

json fit_to_json(const FitResult& fit) {
  const DerivedEstimates d = derived_estimates(fit);
  const Theta& t = fit.theta_hat;
  json theta;
  theta["beta"] = std::vector<double>(t.beta.data(), t.beta.data() + t.beta.size());
  if (fit.family == PseudoFamily::NT) theta["mu"] = t.mu;
  theta["sigma_v"] = t.sigma_v;
  theta["sigma_u"] = t.sigma_u;
  theta["sigma_sq"] = d.sigma_sq.value;
  theta["gamma"] = d.gamma.value;
  theta["sigma_v_sq"] = d.sigma_v_sq.value;
  theta["sigma_u_sq"] = d.sigma_u_sq.value;

  json se;
  const int q = static_cast<int>(t.beta.size());
  std::vector<json> beta_se;
  for (int k = 0; k < q; ++k) beta_se.push_back(fit.covariance_available ? json(fit.std_errors(k)) : json(nullptr));
  se["beta"] = beta_se;
  if (fit.family == PseudoFamily::NT) se["mu"] = fit.covariance_available ? json(fit.std_errors(q)) : json(nullptr);
  se["sigma_sq"] = number_or_null(d.sigma_sq.se);
  se["gamma"] = number_or_null(d.gamma.se);
  se["sigma_v_sq"] = number_or_null(d.sigma_v_sq.se);
  se["sigma_u_sq"] = number_or_null(d.sigma_u_sq.se);

  return {{"alpha", fit.alpha.value()},
          {"family", to_string(fit.family)},
          {"theta", theta},
          {"se", se},
          {"objective", number_or_null(fit.objective_value)},
          {"gradient_norm", number_or_null(fit.gradient_norm)},
          {"converged", fit.converged},
          {"boundary_flag", fit.boundary_flag},
          {"iterations", fit.iterations},
          {"starts", fit.restarts_used},
          {"message", fit.message}};
}

json mcs_to_json(const McsResult& r) {
  return {{"alpha0", r.alpha0.value()},
          {"alpha1", r.alpha1.value()},
          {"sim", r.sim_observed},
          {"sim_bootstrap_max", r.sim_bootstrap_max},
          {"m", r.m},
          {"seed", r.seed},
          {"accept", r.accept},
          {"redraws", r.redraws}};
}

json sim_report_to_json(const SimReport& report) {
  const SimConfig& c = report.config;
  json cfg;
  cfg["n"] = c.n;
  cfg["replications"] = c.replications;
  cfg["family"] = to_string(c.family);
  cfg["truth"] = {{"beta", std::vector<double>(c.truth.beta.data(), c.truth.beta.data() + c.truth.beta.size())},
                  {"mu", c.truth.mu},
                  {"sigma_v_sq", c.truth.sigma_v * c.truth.sigma_v},
                  {"sigma_u_sq", c.truth.sigma_u * c.truth.sigma_u}};
  cfg["contamination"] = {{"kind", to_string(c.contamination.kind)},
                          {"n_outliers", c.contamination.n_outliers},
                          {"p_v", c.contamination.p_v}};
  std::vector<double> alphas;
  for (Alpha a : c.alpha_list) alphas.push_back(a.value());
  cfg["alpha_list"] = alphas;
  cfg["seed"] = c.seed;

  json est = json::array();
  for (const EstimatorSummary& s : report.estimators) {
    json params = json::array();
    for (const ParameterSummary& p : s.parameters)
      params.push_back({{"name", p.name}, {"truth", p.truth}, {"mean", p.mean}, {"sd", p.sd}, {"mse", p.mse}});
    est.push_back({{"alpha", s.alpha.value()},
                   {"parameters", params},
                   {"mean_d", s.mean_d},
                   {"ratio_d", s.ratio_d},
                   {"mse_te", s.mse_te},
                   {"boundary_count", s.boundary_count}});
  }
  return {{"config", cfg},
          {"completed", report.completed},
          {"failed", report.failed},
          {"stream_ids", {{"seed", c.seed}, {"first", 0}, {"last", c.replications - 1}}},
          {"estimators", est}};
}

std::string fit_table(const std::vector<FitResult>& fits) {
  std::ostringstream os;
  if (fits.empty()) return {};
  const int q = static_cast<int>(fits.front().theta_hat.beta.size());
  char buf[64];
  os << std::left;
  std::snprintf(buf, sizeof buf, "%-8s", "alpha");
  os << buf;
  for (int k = 0; k < q; ++k) {
    std::snprintf(buf, sizeof buf, "%-18s", ("beta" + std::to_string(k)).c_str());
    os << buf;
  }
  for (const char* h : {"sigma_sq", "gamma", "sigma_v_sq", "sigma_u_sq"}) {
    std::snprintf(buf, sizeof buf, "%-18s", h);
    os << buf;
  }
  os << "conv\n";
  for (const FitResult& f : fits) {
    const DerivedEstimates d = derived_estimates(f);
    std::snprintf(buf, sizeof buf, "%-8s", fmt3(f.alpha.value()).c_str());
    os << buf;
    const auto cell = [&](double v, double se) {
      std::string s = fmt3(v) + "(" + fmt3(se) + ")";
      std::snprintf(buf, sizeof buf, "%-18s", s.c_str());
      os << buf;
    };
    for (int k = 0; k < q; ++k)
      cell(f.theta_hat.beta(k), f.covariance_available ? f.std_errors(k) : std::nan(""));
    cell(d.sigma_sq.value, d.sigma_sq.se);
    cell(d.gamma.value, d.gamma.se);
    cell(d.sigma_v_sq.value, d.sigma_v_sq.se);
    cell(d.sigma_u_sq.value, d.sigma_u_sq.se);
    os << (f.converged ? "yes" : "no") << (f.boundary_flag ? " boundary" : "") << '\n';
  }
  return os.str();
}

std::string mcs_table(const std::vector<McsResult>& steps) {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-8s %-10s %-14s %-14s %s\n", "T0", "T1", "sim(T0,T1)", "max(sim*)", "H0");
  os << buf;
  for (const McsResult& r : steps) {
    std::snprintf(buf, sizeof buf, "%-8s %-10s %-14s %-14s %s\n", fmt3(r.alpha0.value()).c_str(),
                  fmt3(r.alpha1.value()).c_str(), fmt3(r.sim_observed).c_str(), fmt3(r.sim_bootstrap_max).c_str(),
                  r.accept ? "Acc." : "Rej.");
    os << buf;
  }
  return os.str();
}

std::string sim_table(const SimReport& report) {
  std::ostringstream os;
  char buf[64];
  if (report.estimators.empty()) return {};
  std::snprintf(buf, sizeof buf, "%-8s", "alpha");
  os << buf;
  for (const ParameterSummary& p : report.estimators.front().parameters) {
    std::snprintf(buf, sizeof buf, "%-22s", p.name.c_str());
    os << buf;
  }
  os << "d       [ratio]  mse_te\n";
  for (const EstimatorSummary& s : report.estimators) {
    std::snprintf(buf, sizeof buf, "%-8s", fmt3(s.alpha.value()).c_str());
    os << buf;
    for (const ParameterSummary& p : s.parameters) {
      const std::string cell = fmt3(p.mean) + "(" + fmt3(p.sd) + "/" + fmt3(p.mse) + ")";
      std::snprintf(buf, sizeof buf, "%-22s", cell.c_str());
      os << buf;
    }
    os << fmt3(s.mean_d) << "   [" << fmt3(s.ratio_d) << "]  " << fmt3(s.mse_te) << '\n';
  }
  os << "completed " << report.completed << ", failed " << report.failed << '\n';
  return os.str();
}

double silverman_bandwidth(const Eigen::VectorXd& sample) {
  const int n = static_cast<int>(sample.size());
  if (n < 2) throw DegenerateDataError("kernel density needs at least two points");
  const double mean = sample.mean();
  const double sd = std::sqrt((sample.array() - mean).square().sum() / (n - 1));
  std::vector<double> v(sample.data(), sample.data() + n);
  std::sort(v.begin(), v.end());
  const auto quantile = [&](double p) {
    const double pos = p * (n - 1);
    const int lo = static_cast<int>(std::floor(pos));
    const int hi = std::min(lo + 1, n - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = std::max(std::abs(mean), 1.0) * 1e-3;
  return 0.9 * spread * std::pow(n, -0.2);
}

KernelDensity kernel_density(const Eigen::VectorXd& sample, int points) {
  KernelDensity k;
  k.bandwidth = silverman_bandwidth(sample);
  const double lo = sample.minCoeff() - 3.0 * k.bandwidth;
  const double hi = sample.maxCoeff() + 3.0 * k.bandwidth;
  k.grid = Eigen::VectorXd::LinSpaced(points, lo, hi);
  k.density.resize(points);
  const double norm = 1.0 / (sample.size() * k.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (int g = 0; g < points; ++g)
    k.density(g) = norm * ((sample.array() - k.grid(g)) / k.bandwidth).square().unaryExpr([](double z) {
      return std::exp(-0.5 * z);
    }).sum();
  return k;
}

namespace {

json envelope(const RunConfig& c) {
  return {{"version", kVersion},
          {"config", config_to_json(c)},
          {"seeds", {{"seed", c.seed}, {"fit_seed", c.fit.seed}}}};
}

std::vector<FitResult> fits_for(const Dataset& data, const RunConfig& c) {
  FitOptions opts = c.fit;
  if (!c.alpha_grid.empty()) {
    std::vector<double> grid = c.alpha_grid;
    std::sort(grid.begin(), grid.end());
    opts.alpha_path = to_alphas(grid);
    return fit_alpha_path(data, c.family, opts);
  }
  return {fit_mdpd(data, c.family, Alpha(c.alpha.value_or(0.0)), opts)};
}

bool all_converged(const std::vector<FitResult>& fits) {
  return std::all_of(fits.begin(), fits.end(), [](const FitResult& f) { return f.converged; });
}

Dataset load_input(const RunConfig& c, std::ostream& err) {
  if (c.input_path.empty()) throw ParseError("--input is required for " + c.command);
  std::vector<std::string> warnings;
  Dataset d = load_csv(c.input_path, &warnings);
  for (const std::string& w : warnings) err << "warning: " << w << '\n';
  return d;
}

int cmd_fit(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Dataset data = load_input(c, err);
  const std::vector<FitResult> fits = fits_for(data, c);
  json j = envelope(c);
  j["estimates"] = json::array();
  for (const FitResult& f : fits) j["estimates"].push_back(fit_to_json(f));
  write_json(c.output_path, j);
  out << fit_table(fits);
  return all_converged(fits) ? kExitOk : kExitNonConvergence;
}

int cmd_te(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Dataset data = load_input(c, err);
  const Alpha alpha(c.alpha.value_or(0.0));
  const FitResult fit = fit_mdpd(data, c.family, alpha, c.fit);
  json j = envelope(c);
  j["estimates"] = json::array({fit_to_json(fit)});
  if (!fit.converged) {
    write_json(c.output_path, j);
    err << "error: fit did not converge; no efficiency scores\n";
    return kExitNonConvergence;
  }
  const TEScores te = technical_efficiency(fit, data);
  j["te"] = std::vector<double>(te.te.data(), te.te.data() + te.te.size());
  out << fit_table({fit});
  out << "TE: mean " << fmt3(te.te.mean()) << ", min " << fmt3(te.te.minCoeff()) << ", max "
      << fmt3(te.te.maxCoeff()) << '\n';

  if (!c.output_path.empty()) write_csv(stem_of(c.output_path) + "_te.csv", data, {{"te", te.te}});

  if (c.emit_plots && !c.output_path.empty()) {
    // Compare against the likelihood fit, as in a TE_MD vs TE_ML plot.
    FitResult ml = fit;
    if (!alpha.is_likelihood()) ml = fit_mdpd(data, c.family, Alpha(0.0), c.fit, fit.theta_hat);
    if (!ml.converged) {
      write_json(c.output_path, j);
      err << "error: likelihood fit for the comparison plot did not converge\n";
      return kExitNonConvergence;
    }
    const TEScores te_ml = technical_efficiency(ml, data);
    const KernelDensity k_md = kernel_density(te.te);
    const KernelDensity k_ml = kernel_density(te_ml.te);
    const double lo = std::min(k_md.grid(0), k_ml.grid(0));
    const double hi = std::max(k_md.grid(k_md.grid.size() - 1), k_ml.grid(k_ml.grid.size() - 1));
    const int pts = 512;
    std::ofstream dens(stem_of(c.output_path) + "_te_density.csv");
    dens << "te,density_ml,density_md\n";
    const auto eval = [](const Eigen::VectorXd& s, double h, double x) {
      const double norm = 1.0 / (s.size() * h * std::sqrt(2.0 * std::numbers::pi));
      return norm * ((s.array() - x) / h).square().unaryExpr([](double z) { return std::exp(-0.5 * z); }).sum();
    };
    for (int g = 0; g < pts; ++g) {
      const double x = lo + (hi - lo) * g / (pts - 1);
      dens << fmt17(x) << ',' << fmt17(eval(te_ml.te, k_ml.bandwidth, x)) << ','
           << fmt17(eval(te.te, k_md.bandwidth, x)) << '\n';
    }
    std::ofstream scat(stem_of(c.output_path) + "_te_scatter.csv");
    scat << "te_md,te_ml\n";
    for (int i = 0; i < data.size(); ++i) scat << fmt17(te.te(i)) << ',' << fmt17(te_ml.te(i)) << '\n';
    j["plots"] = {{"density", stem_of(c.output_path) + "_te_density.csv"},
                  {"scatter", stem_of(c.output_path) + "_te_scatter.csv"},
                  {"bandwidth_ml", k_ml.bandwidth},
                  {"bandwidth_md", k_md.bandwidth}};
  }
  write_json(c.output_path, j);
  return kExitOk;
}

int cmd_select_alpha(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Dataset data = load_input(c, err);
  std::vector<Alpha> grid = c.alpha_grid.empty() ? default_alpha_grid() : to_alphas(c.alpha_grid);
  std::sort(grid.begin(), grid.end());
  const AlphaSelection sel = select_alpha(data, c.family, grid.back(), grid, c.m, c.seed, c.fit);
  json j = envelope(c);
  j["mcs"] = {{"alpha_star", grid.back().value()},
              {"selected_alpha", sel.alpha.value()},
              {"exhausted", sel.exhausted},
              {"steps", json::array()}};
  for (const McsResult& r : sel.steps) j["mcs"]["steps"].push_back(mcs_to_json(r));
  write_json(c.output_path, j);
  out << mcs_table(sel.steps);
  out << "selected alpha: " << fmt3(sel.alpha.value()) << (sel.exhausted ? " (grid exhausted)" : "") << '\n';
  return kExitOk;
}

int cmd_influence(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Dataset data = load_input(c, err);
  const FitResult fit = fit_mdpd(data, c.family, Alpha(c.alpha.value_or(0.3)), c.fit);
  if (!fit.converged) {
    err << "error: fit did not converge\n";
    return kExitNonConvergence;
  }
  Eigen::VectorXd x0;
  if (c.x0.empty()) {
    x0 = data.inputs.colwise().mean().transpose();
  } else {
    x0 = Eigen::Map<const Eigen::VectorXd>(c.x0.data(), static_cast<Eigen::Index>(c.x0.size()));
  }
  if (c.y0_points < 2) throw ParameterDomainError("--y0-points must be at least 2");
  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(c.y0_points, c.y0_min, c.y0_max);
  const Eigen::MatrixXd ic = influence_curve(fit, x0, grid, c.fit.quad);

  json j = envelope(c);
  j["estimates"] = json::array({fit_to_json(fit)});
  json rows = json::array();
  char buf[64];
  out << "y0         |IF|\n";
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const Eigen::VectorXd r = ic.row(k).transpose();
    rows.push_back({{"y0", grid(k)}, {"if", std::vector<double>(r.data(), r.data() + r.size())}, {"norm", r.norm()}});
    std::snprintf(buf, sizeof buf, "%-10s %s\n", fmt3(grid(k)).c_str(), fmt3(r.norm()).c_str());
    out << buf;
  }
  j["influence"] = {{"x0", std::vector<double>(x0.data(), x0.data() + x0.size())}, {"rows", rows}};
  write_json(c.output_path, j);
  return kExitOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream&) {
  SimConfig s;
  s.n = c.n;
  s.replications = c.replications.value_or(c.full_scale ? 1000 : 200);
  s.family = c.family;
  s.contamination = c.contamination;
  s.seed = c.seed;
  s.fit = c.fit;
  if (!c.alpha_grid.empty()) {
    std::vector<double> grid = c.alpha_grid;
    std::sort(grid.begin(), grid.end());
    s.alpha_list = to_alphas(grid);
  }
  const SimReport report = run_simulation(s);
  json j = envelope(c);
  j["simulation"] = sim_report_to_json(report);
  write_json(c.output_path, j);
  out << sim_table(report);
  return kExitOk;
}

struct Describe {
  double mean, median, sd, max, min, skewness;
};

Describe describe(std::vector<double> v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double x : v) {
    m2 += (x - mean) * (x - mean);
    m3 += (x - mean) * (x - mean) * (x - mean);
  }
  m2 /= n;
  m3 /= n;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  const double median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  return {mean, median, std::sqrt(m2 * n / (n - 1)), v.back(), v.front(), m3 / std::pow(m2, 1.5)};
}

// Synthetic firm data: Pareto labour, log-normal capital intensity, Cobb-Douglas
// value added with half-normal inefficiency and a handful of very low and very
// high performers. Written as y = log(Y/L), x1 = log(K/L).
int gen_skewed_firms(const RunConfig& c, std::ostream& out) {
  RngStream rng(c.seed, 0);
  const int n = c.n;
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd y(n);
  std::vector<double> ys, ks, ls;
  const int low = std::max(1, n / 100);
  const int high = std::max(1, n / 500);
  for (int i = 0; i < n; ++i) {
    // Pareto(1.1) employment: heavy right tail in L, K and Y.
    const double log_l = std::log(10.0) - std::log1p(-rng.uniform()) / 1.1;
    const double log_kl = 5.0 + 1.3 * rng.standard_normal();
    double u = sample_half_normal(std::sqrt(0.15), rng);
    double v = std::sqrt(0.15) * rng.standard_normal();
    if (i < low) u += 2.5 + rng.uniform();
    if (i >= low && i < low + high) v += 1.5;
    const double log_yl = 7.0 + 0.38 * log_kl + v - u;
    x(i, 0) = log_kl;
    y(i) = log_yl;
    ls.push_back(std::exp(log_l));
    ks.push_back(std::exp(log_kl + log_l));
    ys.push_back(std::exp(log_yl + log_l));
  }
  Dataset d = Dataset::from_columns(std::move(x), std::move(y), true);
  d.input_names = {"x1"};
  write_csv(c.output_path, d);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-4s %14s %14s %14s %14s %14s %9s\n", "", "mean", "median", "sd", "max", "min",
                "skewness");
  out << buf;
  for (const auto& [name, col] : {std::pair<const char*, std::vector<double>*>{"Y", &ys}, {"K", &ks}, {"L", &ls}}) {
    const Describe s = describe(*col);
    std::snprintf(buf, sizeof buf, "%-4s %14.1f %14.1f %14.1f %14.1f %14.1f %9.2f\n", name, s.mean, s.median, s.sd,
                  s.max, s.min, s.skewness);
    out << buf;
  }
  return kExitOk;
}

int cmd_gen_data(const RunConfig& c, std::ostream& out) {
  if (c.output_path.empty()) throw ParameterDomainError("--output is required for gen-data");
  if (c.preset == "skewed-firms") return gen_skewed_firms(c, out);
  if (c.preset != "baseline") throw ParameterDomainError("unknown preset '" + c.preset + "'");
  SimConfig s;
  s.n = c.n;
  s.family = c.family;
  RngStream rng(c.seed, 0);
  Dataset d = generate_clean(s, rng);
  if (c.contamination.kind == ContaminationKind::Upward)
    d = contaminate_upward(d, c.contamination.n_outliers, c.contamination.p_v, s.truth, rng);
  if (c.contamination.kind == ContaminationKind::Downward) d = contaminate_downward(d, c.contamination.n_outliers, rng);
  write_csv(c.output_path, d);
  out << "wrote " << d.size() << " rows to " << c.output_path << '\n';
  return kExitOk;
}

}  // namespace

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    if (c.threads > 0) omp_set_num_threads(c.threads);
    if (c.command == "fit") return cmd_fit(c, out, err);
    if (c.command == "te") return cmd_te(c, out, err);
    if (c.command == "select-alpha") return cmd_select_alpha(c, out, err);
    if (c.command == "influence") return cmd_influence(c, out, err);
    if (c.command == "simulate") return cmd_simulate(c, out, err);
    if (c.command == "gen-data") return cmd_gen_data(c, out);
    err << "error: unknown command '" << c.command << "'\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DesignMatrixError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DegenerateDataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ParameterDomainError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NonConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const SingularInformationError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Robust stochastic frontier estimation by minimum density power divergence"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  RunConfig c;
  std::string family = "nh";
  std::string contamination = "none";
  double alpha = 0.0;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--input", c.input_path, "input CSV (header row, column y)");
    sub->add_option("--output", c.output_path, "JSON report path (CSV for gen-data)");
    sub->add_option("--family", family, "pseudo family")->check(CLI::IsMember({"nt", "nh", "ne"}));
    sub->add_option("--seed", c.seed, "seed for every random stream");
    sub->add_option("--threads", c.threads, "OpenMP threads (0 = default)");
    sub->add_option("--restarts", c.fit.num_restarts, "jittered optimizer restarts per fit");
  };
  CLI::App* fit = app.add_subcommand("fit", "fit the frontier at one alpha or along a grid");
  CLI::App* te = app.add_subcommand("te", "fit and score technical efficiency");
  CLI::App* sel = app.add_subcommand("select-alpha", "choose alpha with the bootstrap similarity test");
  CLI::App* inf = app.add_subcommand("influence", "influence curve over a y0 grid at fixed x0");
  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo contamination experiment");
  CLI::App* gen = app.add_subcommand("gen-data", "write a synthetic dataset");
  for (CLI::App* s : {fit, te, sel, inf, sim, gen}) common(s);
  for (CLI::App* s : {fit, te, inf}) s->add_option("--alpha", alpha, "tuning parameter in [0, 1]");
  for (CLI::App* s : {fit, sel, sim}) s->add_option("--alpha-grid", c.alpha_grid, "comma-separated alphas")->delimiter(',');
  te->add_flag("--emit-plots", c.emit_plots, "write TE density and scatter CSVs");
  sel->add_option("--m", c.m, "bootstrap size (m - 1 resamples)");
  for (CLI::App* s : {sim, gen}) {
    s->add_option("--n", c.n, "sample size");
    s->add_option("--contamination", contamination, "outlier type")->check(CLI::IsMember({"none", "up", "down"}));
    s->add_option("--n-outliers", c.contamination.n_outliers, "number of replaced rows");
    s->add_option("--p-v", c.contamination.p_v, "upward shift in sigma_v units");
  }
  sim->add_option("--replications", c.replications, "replications (default 200)");
  sim->add_flag("--full-scale", c.full_scale, "1000 replications");
  gen->add_option("--preset", c.preset, "baseline or skewed-firms")->check(CLI::IsMember({"baseline", "skewed-firms"}));
  inf->add_option("--x0", c.x0, "input point (comma-separated)")->delimiter(',');
  inf->add_option("--y0-min", c.y0_min);
  inf->add_option("--y0-max", c.y0_max);
  inf->add_option("--y0-points", c.y0_points);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  for (CLI::App* s : {fit, te, sel, inf, sim, gen})
    if (s->parsed()) c.command = s->get_name();
  try {
    c.family = parse_family(family);
    c.contamination.kind = parse_contamination(contamination);
    if (c.contamination.kind != ContaminationKind::None && c.contamination.n_outliers == 0)
      c.contamination.n_outliers = 3;
    for (CLI::App* s : {fit, te, inf})
      if (s->parsed() && s->count("--alpha") > 0) c.alpha = Alpha(alpha).value();
    for (double a : c.alpha_grid) (void)Alpha(a);
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  return run(c, std::cout, std::cerr);
}

}  // namespace mdpdsf
