#include <benchmark/benchmark.h>
#include <omp.h>

#include "mdpdsf/mdpd_objective.hpp"
#include "mdpdsf/robustness.hpp"

using namespace mdpdsf;

namespace {

Dataset sample(int n) {
  SimConfig c;
  c.n = n;
  RngStream rng(7, 0);
  return generate_clean(c, rng);
}

void BM_ObjectiveParallel(benchmark::State& state) {
  const Dataset d = sample(static_cast<int>(state.range(0)));
  const Theta t = SimConfig::default_truth();
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_objective(d, PseudoFamily::NH, t, Alpha(0.3), {}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ObjectiveSerialReference(benchmark::State& state) {
  const Dataset d = sample(static_cast<int>(state.range(0)));
  const Theta t = SimConfig::default_truth();
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::evaluate_objective_serial(d, PseudoFamily::NH, t, Alpha(0.3), {}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PowerTerms(benchmark::State& state) {
  const Theta t = SimConfig::default_truth();
  const auto fam = static_cast<PseudoFamily>(state.range(0));
  Theta th = t;
  if (fam == PseudoFamily::NT) th.mu = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(power_terms(fam, th, Alpha(0.5), {}));
}

}  // namespace

BENCHMARK(BM_ObjectiveParallel)->ArgsProduct({{500, 5000}, {1, omp_get_max_threads()}});
BENCHMARK(BM_ObjectiveSerialReference)->Arg(500)->Arg(5000);
BENCHMARK(BM_PowerTerms)->DenseRange(0, 2);

BENCHMARK_MAIN();
