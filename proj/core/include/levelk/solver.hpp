#pragma once

#include <array>
#include <map>
#include <optional>
#include <vector>

#include "levelk/belief.hpp"
#include "levelk/policy.hpp"
#include "levelk/reward.hpp"
#include "levelk/scene.hpp"

namespace levelk {

inline constexpr int kMaxLevel = 2;

struct SolverConfig {
  int max_sequence_depth = 3;
  HorizonSpec horizon;
  ManeuverParams maneuver;

  void validate() const;
};

/// All maneuver sequences a vehicle may follow over the horizon, in
/// lexicographic tie-break order. A sequence stops at the first position
/// where its nominal durations cover the horizon; sequences that reach
/// max_sequence_depth without covering it hold their last maneuver. Lane
/// changes off the road (lane tracked statically) are pruned.
/// Throws ConfigError when max_sequence_depth maneuvers cannot cover the horizon.
std::vector<PolicySkeleton> enumerate_policies(const VehicleState& vehicle,
                                               const RoadGeometry& road,
                                               const SolverConfig& config);

/// Best response of `ego` when every other vehicle keeps constant velocity.
Policy solve_level0(const Scene& scene, VehicleId ego, const SolverConfig& config,
                    const RewardWeights& weights);

/// Best response of `ego` when every other vehicle replays its level k-1
/// policy from `lower_level`. k must be 1 or 2.
Policy solve_level_k(const Scene& scene, VehicleId ego, int k,
                     const std::map<VehicleId, Policy>& lower_level, const SolverConfig& config,
                     const RewardWeights& weights);

/// Level 0..max_level policies of every vehicle, each level best-responding
/// to all other vehicles' previous level.
LevelPolicyTable solve_level_hierarchy(const Scene& scene, const SolverConfig& config,
                                       const RewardWeights& weights, int max_level = kMaxLevel);

struct CandidateValue {
  PolicySkeleton skeleton;
  double value;
};

struct Prediction {
  Policy policy;          // belief-weighted best target policy
  double value = 0.0;     // its expected discounted reward
  LevelPolicyTable levels;  // every vehicle, levels 0..2
  /// Best expected reward among target policies starting with each maneuver;
  /// empty for maneuvers the target cannot start.
  std::array<std::optional<double>, kNumManeuvers> first_maneuver_values;
  std::vector<CandidateValue> candidates;

  ManeuverType maneuver() const { return policy.first(); }
};

/// Builds the level hierarchy of every vehicle, then picks the target policy
/// that maximizes the expected reward under the per-vehicle level beliefs.
/// Every non-target needs a normalized belief (ContractViolation otherwise).
Prediction predict_target(const Scene& scene, const BeliefMap& beliefs, const SolverConfig& config,
                          const RewardWeights& weights);

}  // namespace levelk
