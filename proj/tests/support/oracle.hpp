#pragma once

#include <array>
#include <map>
#include <optional>
#include <vector>

#include <levelk/belief.hpp>
#include <levelk/policy.hpp>
#include <levelk/reward.hpp>
#include <levelk/scene.hpp>
#include <levelk/solver.hpp>

namespace oracle {

using levelk::PolicySkeleton;
using levelk::VehicleId;

struct Result {
  PolicySkeleton target;  // best target sequence
  double value = 0.0;     // its belief-weighted cost
  std::map<VehicleId, std::array<PolicySkeleton, 3>> levels;
  std::array<std::optional<double>, levelk::kNumManeuvers> first_maneuver_values;
  std::vector<std::pair<PolicySkeleton, double>> candidates;
};

/// Exhaustive evaluation of the target prediction with no pruning: every
/// maneuver tuple is tried, infeasible ones are discovered by simulating them,
/// and the scene is rebuilt step by step. Refuses scenes with more than three
/// vehicles or depth above two.
Result brute_force(const levelk::Scene& scene, const levelk::BeliefMap& beliefs,
                   const levelk::SolverConfig& config, const levelk::RewardWeights& weights);

/// Step reward recomputed from scratch: all pairs, no short-circuits.
double naive_step_reward(const std::vector<levelk::VehicleState>& vehicles,
                         const levelk::RoadGeometry& road, const levelk::RewardWeights& w,
                         double vmax);

}  // namespace oracle
