#pragma once

#include <cstdint>

namespace levelk {

using VehicleId = std::int64_t;

/// Kinematic state of one vehicle in the road-aligned frame (SI units).
/// x runs along the road, y across it measured from the right road edge.
struct VehicleState {
  VehicleId id = 0;
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double ax = 0.0;
  double ay = 0.0;
  double length = 4.5;
  double width = 1.8;
  int lane = 0;  // 0 is the rightmost lane

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct RoadGeometry {
  int num_lanes = 3;
  double lane_width = 3.6;
  double road_length = 1000.0;

  double width() const { return num_lanes * lane_width; }
  double lane_center(int lane) const { return (lane + 0.5) * lane_width; }
  bool valid_lane(int lane) const { return lane >= 0 && lane < num_lanes; }
  /// Lane whose strip contains y, clamped to the road.
  int lane_at(double y) const;

  /// Throws InvalidArgument when num_lanes < 1 or lane_width <= 0.
  void validate() const;

  friend bool operator==(const RoadGeometry&, const RoadGeometry&) = default;
};

/// Throws InvalidArgument when the state breaks the VehicleState invariants
/// (positive dimensions, vx >= 0, lane consistent with y).
void validate_state(const VehicleState& state, const RoadGeometry& road);

}  // namespace levelk
