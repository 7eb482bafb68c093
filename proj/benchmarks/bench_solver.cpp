#include <benchmark/benchmark.h>

#include <levelk/solver.hpp>

namespace {

using namespace levelk;

Scene three_vehicle_scene() {
  const RoadGeometry road{3, 3.6, 1000.0};
  std::vector<VehicleState> v(3);
  v[0] = {1, 100.0, road.lane_center(1), 25.0, 0, 0, 0, 4.5, 1.8, 1};
  v[1] = {2, 120.0, road.lane_center(1), 20.0, 0, 0, 0, 4.5, 1.8, 1};
  v[2] = {3, 90.0, road.lane_center(0), 28.0, 0, 0, 0, 4.5, 1.8, 0};
  return Scene(0.0, v, road, 1);
}

void BM_PredictTarget(benchmark::State& state) {
  const Scene scene = three_vehicle_scene();
  SolverConfig cfg;
  cfg.max_sequence_depth = static_cast<int>(state.range(0));
  BeliefMap beliefs{{2, LevelBelief::uniform(2)}, {3, LevelBelief::uniform(3)}};
  for (auto _ : state) benchmark::DoNotOptimize(predict_target(scene, beliefs, cfg, RewardWeights{}));
}
BENCHMARK(BM_PredictTarget)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_LevelHierarchy(benchmark::State& state) {
  const Scene scene = three_vehicle_scene();
  const SolverConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(solve_level_hierarchy(scene, cfg, RewardWeights{}, 2));
}
BENCHMARK(BM_LevelHierarchy)->Unit(benchmark::kMillisecond);

}  // namespace
