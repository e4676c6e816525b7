#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdpdsf/alpha_select.hpp"
#include "mdpdsf/dataset.hpp"
#include "mdpdsf/efficiency.hpp"
#include "mdpdsf/fit.hpp"
#include "mdpdsf/robustness.hpp"

namespace mdpdsf {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitNonConvergence = 4 };

/// Header row, a column named `y`, every other column an input (in order).
/// Non-numeric, missing or non-finite cells throw ParseError carrying the
/// 1-based data row and column. A constant y column adds a warning.
Dataset load_csv(const std::string& path, std::vector<std::string>* warnings = nullptr);

/// Writes y then the inputs with 17 significant digits, plus optional extra
/// named columns of length n.
void write_csv(const std::string& path, const Dataset& data,
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& extra = {});

struct RunConfig {
  std::string command;  // fit | te | select-alpha | influence | simulate | gen-data
  std::string input_path;
  std::string output_path;
  PseudoFamily family = PseudoFamily::NH;
  std::optional<double> alpha;
  std::vector<double> alpha_grid;
  FitOptions fit;
  int m = 99;
  std::uint64_t seed = 20240101;
  bool emit_plots = false;
  bool full_scale = false;
  std::optional<int> replications;
  Contamination contamination;
  int n = 500;
  std::vector<double> x0;
  double y0_min = -100.0;
  double y0_max = 100.0;
  int y0_points = 201;
  std::string preset = "baseline";
  int threads = 0;  // 0 keeps the OpenMP default
};

nlohmann::json config_to_json(const RunConfig& config);
nlohmann::json fit_to_json(const FitResult& fit);
nlohmann::json mcs_to_json(const McsResult& result);
/// Runtime is left out so identical configs serialize identically.
nlohmann::json sim_report_to_json(const SimReport& report);

std::string fit_table(const std::vector<FitResult>& fits);
std::string mcs_table(const std::vector<McsResult>& steps);
std::string sim_table(const SimReport& report);

/// Gaussian kernel density on an even grid, Silverman bandwidth.
struct KernelDensity {
  Eigen::VectorXd grid;
  Eigen::VectorXd density;
  double bandwidth = 0.0;
};
KernelDensity kernel_density(const Eigen::VectorXd& sample, int points = 512);
double silverman_bandwidth(const Eigen::VectorXd& sample);

/// Executes one command. Human-readable tables go to `out`, diagnostics to
/// `err`; the JSON report (and CSVs) go under config.output_path.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv with CLI11 and runs.
int cli_main(int argc, char** argv);

}  // namespace mdpdsf
