#include <benchmark/benchmark.h>

#include "exch/bench.hpp"
#include "exch/discovery.hpp"
#include "exch/duality.hpp"

namespace {

void BM_Simulate(benchmark::State& state) {
  exch::DGPConfig c;
  c.n_environments = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(exch::simulate_dataset(c, seed++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(100)->Arg(500)->Arg(5000);

void BM_Discover(benchmark::State& state) {
  exch::DGPConfig c;
  c.n_environments = static_cast<std::size_t>(state.range(0));
  const auto ds = exch::simulate_dataset(c, 4);
  for (auto _ : state) benchmark::DoNotOptimize(exch::discover_structure(ds));
}
BENCHMARK(BM_Discover)->Arg(100)->Arg(500)->Arg(5000);

void BM_BenchmarkGrid(benchmark::State& state) {
  exch::BenchConfig c;
  c.n_seeds = 10;
  c.jobs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(exch::run_benchmark(c));
}
BENCHMARK(BM_BenchmarkGrid)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_VerifyDuality(benchmark::State& state) {
  exch::DualityConfig c;
  c.mixing = {exch::MixingKind::TriangularAffinePlusTanh, 2, 5};
  c.base = {exch::DensityFamily::Gaussian, {0, 0}, {1, 1}};
  c.per_u = {{exch::DensityFamily::Gaussian, {0, 0}, {0.5, 0.5}}, {exch::DensityFamily::Gaussian, {0, 0}, {2, 2}}};
  c.n_samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(exch::verify_duality(c));
}
BENCHMARK(BM_VerifyDuality)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
