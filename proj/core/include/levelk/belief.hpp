#pragma once

#include <array>
#include <map>

#include "levelk/scene.hpp"

namespace levelk {

inline constexpr int kNumLevels = 3;

/// Probability that one vehicle reasons at level 0, 1 or 2.
struct LevelBelief {
  VehicleId vehicle = 0;
  std::array<double, kNumLevels> p{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  long updates = 0;

  static LevelBelief uniform(VehicleId id) { return LevelBelief{id, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 0}; }
  /// Most probable level; ties go to the smaller k.
  int most_likely() const;
  /// Throws InvalidArgument when an entry is negative or |sum - 1| > 1e-9.
  void validate() const;
};

using BeliefMap = std::map<VehicleId, LevelBelief>;

struct DistanceWeights {
  double position = 1.0;  // per m^2
  double velocity = 0.25; // per (m/s)^2
};

struct BeliefConfig {
  double delta = 0.1;
  DistanceWeights weights;
  std::array<double, kNumLevels> initial{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

  void validate() const;
};

/// Entries that start positive never drop below this after an update.
inline constexpr double kProbabilityFloor = 1e-12;

/// Weighted squared position and velocity error summed over vehicles.
/// Throws InvalidArgument if the two scenes hold different vehicle ids.
double joint_state_distance(const Scene& simulated, const Scene& measured,
                            const DistanceWeights& weights);

/// Adds delta to level k_star and renormalizes.
LevelBelief reinforce_level(const LevelBelief& belief, int k_star, double delta);

/// Picks the level whose simulated scene lies closest to the measurement
/// (ties to smaller k) and reinforces it.
LevelBelief update_belief(const LevelBelief& belief, const std::array<Scene, kNumLevels>& simulated,
                          const Scene& measured, const BeliefConfig& config);

/// Index of the closest simulated scene, ties to the smaller k.
int closest_level(const std::array<Scene, kNumLevels>& simulated, const Scene& measured,
                  const DistanceWeights& weights);

}  // namespace levelk
