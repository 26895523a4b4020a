#include <benchmark/benchmark.h>

#include "exch/citest.hpp"
#include "exch/rng.hpp"

namespace {

struct Triple {
  std::vector<double> x, y, z;
};

Triple draw(std::size_t n) {
  exch::Stream s(1);
  Triple t{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    t.z[i] = s.laplace(0.0, 1.0);
    t.x[i] = t.z[i] + s.laplace(0.0, 1.0);
    t.y[i] = t.z[i] + s.laplace(0.0, 1.0);
  }
  return t;
}

void BM_FisherConditional(benchmark::State& state) {
  const auto t = draw(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(exch::conditional_independence_test(t.x, t.y, t.z));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FisherConditional)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_SpearmanConditional(benchmark::State& state) {
  const auto t = draw(static_cast<std::size_t>(state.range(0)));
  const exch::CITestOptions o{exch::TestMethod::SpearmanZ};
  for (auto _ : state) benchmark::DoNotOptimize(exch::conditional_independence_test(t.x, t.y, t.z, o));
}
BENCHMARK(BM_SpearmanConditional)->RangeMultiplier(4)->Range(64, 16384);

void BM_ResidualPermutation(benchmark::State& state) {
  const auto t = draw(static_cast<std::size_t>(state.range(0)));
  const exch::CITestOptions o{exch::TestMethod::ResidualPermutation, 100, 3};
  for (auto _ : state) benchmark::DoNotOptimize(exch::conditional_independence_test(t.x, t.y, t.z, o));
}
BENCHMARK(BM_ResidualPermutation)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

}  // namespace
