#pragma once

#include <cstdint>
#include <vector>

#include "mdpdsf/dataset.hpp"
#include "mdpdsf/fit.hpp"
#include "mdpdsf/mdpd_objective.hpp"

namespace mdpdsf {

struct McsResult {
  double sim_observed = 0.0;
  double sim_bootstrap_max = 0.0;
  int m = 0;
  bool accept = false;
  std::uint64_t seed = 0;
  Alpha alpha0;
  Alpha alpha1;
  std::vector<double> sim_bootstrap;  // m - 1 values, replicate order
  int redraws = 0;
};

/// Share of the box [input ranges] x [min y, max y] lying between the two
/// fitted frontiers. Tensor-grid trapezoid rule over the inputs.
double similarity_index(const Dataset& data, const FitResult& fit0, const FitResult& fit1);

/// Parametric-bootstrap test of H0: T0 and T1 estimate the same frontier.
/// Samples come from the fit0 model at the observed inputs; both arms are
/// refit on each. Accepts iff the observed index is at most the bootstrap max.
McsResult mcs_test(const Dataset& data, PseudoFamily family, const FitResult& fit0, const FitResult& fit1, int m,
                   std::uint64_t seed, const FitOptions& options = {});

/// Same, fitting T1 at alpha1 on the observed data first.
McsResult mcs_test(const Dataset& data, PseudoFamily family, const FitResult& fit0, Alpha alpha1, int m,
                   std::uint64_t seed, const FitOptions& options = {});

struct AlphaSelection {
  Alpha alpha;
  bool exhausted = false;  // no grid point accepted; alpha is alpha_star
  std::vector<McsResult> steps;
};

/// Tests alpha = 0 against alpha_star, then each grid point strictly between
/// 0 and alpha_star in order, stopping at the first acceptance.
AlphaSelection select_alpha(const Dataset& data, PseudoFamily family, Alpha alpha_star,
                            const std::vector<Alpha>& alpha_grid, int m, std::uint64_t seed,
                            const FitOptions& options = {});

std::vector<Alpha> default_alpha_grid();

}  // namespace mdpdsf
