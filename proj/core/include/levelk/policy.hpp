#pragma once

#include <vector>

#include "levelk/maneuver.hpp"

namespace levelk {

/// Level marker for the belief-weighted target policy.
inline constexpr int kTargetLevel = -1;

using PolicySkeleton = std::vector<ManeuverType>;

/// A horizon-filling sequence of chained maneuvers. The last maneuver is held
/// past its nominal end, so a policy is defined for every t >= its start.
struct Policy {
  VehicleId owner = 0;
  int level = 0;
  std::vector<ManeuverInstance> maneuvers;

  ManeuverType first() const { return maneuvers.front().type; }
  double start_time() const { return maneuvers.front().start_time; }
  /// End of the last maneuver's nominal duration.
  double nominal_end() const { return maneuvers.back().end_time(); }
  PolicySkeleton skeleton() const;

  /// Maneuver in effect at t (the last one whose start is <= t).
  const ManeuverInstance& active_at(double t) const;
  VehicleState state_at(double t, const RoadGeometry& road) const;

  /// Throws ContractViolation if empty or if start times do not chain.
  void validate() const;

  friend bool operator==(const Policy& a, const Policy& b);
};

/// Builds the chained instances of a skeleton from an initial state. Each
/// maneuver starts from the terminal state of the previous one.
Policy instantiate_policy(const VehicleState& initial, double start_time,
                          const PolicySkeleton& skeleton, const ManeuverParams& params,
                          const RoadGeometry& road, int level);

/// Constant-velocity policy for the whole horizon (the level-0 opponent model).
Policy hold_policy(const VehicleState& initial, double start_time, const ManeuverParams& params,
                   int level = 0);

using Trajectory = std::vector<VehicleState>;

/// States at start_time + n*dt for n in [0, steps).
Trajectory sample_trajectory(const Policy& policy, double start_time, int steps, double dt,
                             const RoadGeometry& road);

}  // namespace levelk
