#pragma once

#include <cstdint>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "levelk/belief.hpp"
#include "levelk/classifier.hpp"
#include "levelk/evaluation.hpp"
#include "levelk/maneuver.hpp"
#include "levelk/pipeline.hpp"
#include "levelk/reward.hpp"
#include "levelk/scenario.hpp"
#include "levelk/solver.hpp"
#include "levelk/tracker.hpp"

namespace levelk {

/// Every tunable parameter of the toolchain. Missing keys keep their defaults.
struct AppConfig {
  std::uint64_t seed = 1;
  SolverConfig solver;
  RewardWeights weights;
  CarFollowingParams car_following;
  BeliefConfig belief;
  double fusion_temperature = 1.0;
  PipelineConfig pipeline;
  FeatureConfig features;
  SvmHyperparams svm;
  double train_split = 0.6;      // fraction of episodes / packages used for training
  int train_frame_spacing = 5;   // keep every n-th frame as a training sample
  int predict_stride = 2;        // predict every n-th frame
  EvalConfig evaluation;
  int episodes = 1;              // generate: episodes per run
  ScenarioSpec scenario;

  TrackerConfig tracker() const { return {solver, weights, belief, fusion_temperature}; }
  /// Throws ConfigError naming the first invalid parameter.
  void validate() const;
};

/// Throws ConfigError on unknown keys or mistyped values.
AppConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const AppConfig& config);
AppConfig load_config(const std::filesystem::path& path);

}  // namespace levelk
