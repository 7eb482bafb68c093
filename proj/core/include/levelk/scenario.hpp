#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "levelk/maneuver.hpp"
#include "levelk/pipeline.hpp"
#include "levelk/reward.hpp"
#include "levelk/scene.hpp"
#include "levelk/solver.hpp"

namespace levelk {

/// Level marker of a non-strategic vehicle that keeps its initial speed and lane.
inline constexpr int kCruiseLevel = -1;

struct ScenarioSpec {
  std::uint64_t seed = 1;
  int num_vehicles = 3;
  RoadGeometry road{3, 3.6, 1000.0};
  /// Reasoning level per strategic vehicle; drawn uniformly from {0, 1, 2}
  /// when empty. With explicit initial states, kCruiseLevel marks slow traffic.
  std::vector<int> levels;
  /// Extra constant-speed vehicles placed ahead of the strategic ones.
  int cruisers = 0;
  double cruiser_min_speed = 12.0;
  double cruiser_max_speed = 18.0;
  double cruiser_ahead = 40.0;  // m beyond the strategic spread where cruisers start
  /// Initial placement: vehicles spread over [0, num_vehicles * spread_per_vehicle] m.
  double spread_per_vehicle = 15.0;
  double min_speed = 20.0;
  double max_speed = 30.0;
  double vehicle_length = 4.5;
  double vehicle_width = 1.8;
  double episode_length = 15.0;  // s
  double dt = kDefaultDt;
  int max_retries = 200;
  /// Apply the car-following law to NoAction vehicles that close on a leader.
  bool follow_leader = false;
  /// Explicit initial states; random placement is skipped when non-empty.
  std::vector<VehicleState> initial;

  void validate(double vmax) const;
};

nlohmann::json scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& j);

struct ManeuverSegment {
  VehicleId vehicle = 0;
  ManeuverType type = ManeuverType::kNoAction;
  long start_step = 0;
  double start_time = 0.0;
  VehicleState start_state;
};

struct Episode {
  ScenarioSpec spec;
  std::map<VehicleId, int> levels;  // kCruiseLevel for cruisers
  std::vector<Scene> frames;                            // one per step, frame 0 at t = 0
  std::map<VehicleId, std::vector<ManeuverType>> labels;  // executing maneuver per step
  std::vector<ManeuverSegment> segments;                // in start order
};

/// Randomized collision-free initial scene (bodies and safety envelopes
/// disjoint). Throws InvalidArgument after spec.max_retries failed draws.
Scene initial_scene(const ScenarioSpec& spec);

/// Simulates level-k agents: each vehicle replans with its own level whenever
/// its current maneuver completes and executes the first maneuver of that plan.
/// Deterministic for a given spec.
Episode generate_episode(const ScenarioSpec& spec, const SolverConfig& solver,
                         const RewardWeights& weights, const CarFollowingParams& following = {});

std::vector<EgoPackage> episode_packages(const Episode& episode, double window_longitudinal,
                                         double window_lateral);
GroundTruth episode_ground_truth(const Episode& episode);

/// Packages, manifest, labels.json and scenario.json (with the drawn levels).
Manifest write_episode(const Episode& episode, const std::filesystem::path& dir,
                       double window_longitudinal, double window_lateral);

}  // namespace levelk
