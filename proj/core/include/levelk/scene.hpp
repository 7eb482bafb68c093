#pragma once

#include <map>
#include <span>
#include <vector>

#include "levelk/maneuver.hpp"
#include "levelk/vehicle.hpp"

namespace levelk {

inline constexpr double kDefaultDt = 0.05;

/// Joint state of all vehicles at one instant plus the road they share.
/// Immutable after construction; the constructor enforces unique ids and the
/// presence of the target.
class Scene {
 public:
  Scene(double time, std::vector<VehicleState> vehicles, RoadGeometry road, VehicleId target_id);

  double time() const { return time_; }
  const std::vector<VehicleState>& vehicles() const { return vehicles_; }
  const RoadGeometry& road() const { return road_; }
  VehicleId target_id() const { return target_id_; }
  std::size_t size() const { return vehicles_.size(); }

  bool contains(VehicleId id) const;
  /// Throws NotFound for unknown ids.
  const VehicleState& at(VehicleId id) const;
  std::size_t index_of(VehicleId id) const;
  const VehicleState& target() const { return at(target_id_); }

  /// Same road and target, new time and states (validated again).
  Scene with_vehicles(double time, std::vector<VehicleState> vehicles) const;

  friend bool operator==(const Scene&, const Scene&) = default;

 private:
  double time_;
  std::vector<VehicleState> vehicles_;
  RoadGeometry road_;
  VehicleId target_id_;
};

using ManeuverAssignment = std::map<VehicleId, ManeuverInstance>;

/// Advances the scene by dt, evaluating every vehicle's maneuver in closed form
/// at scene.time() + dt. Throws InvalidArgument for dt <= 0 and
/// ContractViolation for a missing assignment or one that starts in the future.
Scene step_scene(const Scene& scene, const ManeuverAssignment& assignments, double dt);

struct RelativeState {
  VehicleId id;
  double x;
  double y;
  double vx;
  double vy;
};

/// Positions of every other vehicle relative to the host, with absolute velocities.
std::vector<RelativeState> relative_frame(const Scene& scene, VehicleId host_id);

}  // namespace levelk
