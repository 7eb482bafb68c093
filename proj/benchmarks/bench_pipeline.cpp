#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include <levelk/filters.hpp>

namespace {

void BM_SavitzkyGolay(benchmark::State& state) {
  std::vector<double> series(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < series.size(); ++i) series[i] = std::sin(0.01 * i) + 1e-3 * (i % 7);
  for (auto _ : state) benchmark::DoNotOptimize(levelk::savitzky_golay(series, 11, 3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SavitzkyGolay)->Arg(1000)->Arg(10000);

void BM_FiniteDifference(benchmark::State& state) {
  std::vector<double> series(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < series.size(); ++i) series[i] = 0.5 * i * i * 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(levelk::finite_difference_velocity(series, 0.1));
}
BENCHMARK(BM_FiniteDifference)->Arg(10000);

}  // namespace
