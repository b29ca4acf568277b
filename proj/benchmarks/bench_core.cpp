#include <benchmark/benchmark.h>

#include "covlab/coverage.hpp"
#include "covlab/decision.hpp"
#include "covlab/experiment.hpp"
#include "covlab/paper_example.hpp"

namespace {

using namespace covlab;

void BM_Maxmin(benchmark::State& state) {
  const auto p = paper_example();
  const std::vector<Label> region{"theta1", "theta2"};
  for (auto _ : state) benchmark::DoNotOptimize(maxmin_action(p, region));
}
BENCHMARK(BM_Maxmin);

void BM_MinmaxRegret(benchmark::State& state) {
  const auto p = paper_example();
  const std::vector<Label> region{"theta1", "theta2", "theta3", "theta4"};
  for (auto _ : state) benchmark::DoNotOptimize(minmax_regret_action(p, region));
}
BENCHMARK(BM_MinmaxRegret);

void BM_SyntheticRegion(benchmark::State& state) {
  const std::vector<Label> id{"theta1", "theta2"};
  const auto mode = state.range(0) ? CoverageMode::point_coverage : CoverageMode::set_coverage;
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(synthetic_region(id, id, {0.05, mode, {}}, rng));
}
BENCHMARK(BM_SyntheticRegion)->Arg(0)->Arg(1);

void BM_RandomizedPValue(benchmark::State& state) {
  const std::vector<double> q{0.5, 0.5};
  const std::uint64_t n = static_cast<std::uint64_t>(state.range(0));
  Rng rng(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(randomized_p_value(q, 1.5, n, 0.5, kDefaultReferenceDraws, rng));
  }
}
BENCHMARK(BM_RandomizedPValue)->Arg(100)->Arg(1000);

void BM_RunExperimentSynthetic(benchmark::State& state) {
  ExperimentConfig cfg(paper_example());
  cfg.replications = static_cast<std::uint64_t>(state.range(0));
  cfg.keep_records = false;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunExperimentSynthetic)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_RunExperimentTestInversion(benchmark::State& state) {
  ExperimentConfig cfg(paper_example());
  cfg.replications = 100;
  cfg.keep_records = false;
  cfg.sc.kind = ProcessKind::test_inversion;
  cfg.pc.kind = ProcessKind::test_inversion;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_RunExperimentTestInversion)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
