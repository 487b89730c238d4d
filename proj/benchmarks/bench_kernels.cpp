// Serial reference vs OpenMP kernels on the reference synthetic workload.

#include <benchmark/benchmark.h>

#include "nestprune/bench.hpp"
#include "nestprune/cv_engine.hpp"

namespace {

nestprune::PrunerConfig reference_pruner() {
  nestprune::PrunerConfig c;
  c.threshold = 0.45;
  c.extrapolation = nestprune::ExtrapolationMethod::mean_deviation;
  return c;
}

nestprune::BenchConfig reference_bench(int reps) {
  nestprune::BenchConfig b;
  b.repetitions = reps;
  b.trials_per_rep = 40;
  b.base_seed = 42;
  b.variants = {{"asha", nestprune::preset_config("asha", reference_pruner())},
                {"three-layer", nestprune::preset_config("three-layer", reference_pruner())}};
  return b;
}

void BM_ComparePrunersSerial(benchmark::State& state) {
  const auto bench = reference_bench(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nestprune::compare_pruners_serial(bench));
}
BENCHMARK(BM_ComparePrunersSerial)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_ComparePrunersParallel(benchmark::State& state) {
  const auto bench = reference_bench(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nestprune::compare_pruners(bench));
}
BENCHMARK(BM_ComparePrunersParallel)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_RunStudyWorkers(benchmark::State& state) {
  nestprune::TraceGenConfig g;
  g.trials = 200;
  const auto cohort = nestprune::generate_cohort(g);
  const auto cfg = reference_pruner();
  for (auto _ : state) benchmark::DoNotOptimize(nestprune::run_study(cohort, cfg, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_RunStudyWorkers)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ThresholdDecideWindow(benchmark::State& state) {
  nestprune::TraceGenConfig g;
  g.trials = 1;
  const auto metrics = nestprune::generate_cohort(g).front().metrics();
  const std::span<const double> window(metrics.data(), 100);
  const auto cfg = reference_pruner();
  for (auto _ : state) benchmark::DoNotOptimize(nestprune::threshold_decide(window, 0, cfg));
}
BENCHMARK(BM_ThresholdDecideWindow);

}  // namespace

BENCHMARK_MAIN();
