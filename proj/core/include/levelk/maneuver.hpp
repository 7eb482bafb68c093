#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "levelk/vehicle.hpp"

namespace levelk {

/// The five discrete actions. Enumerator order is the solver's tie-break order.
enum class ManeuverType : std::uint8_t {
  kNoAction = 0,
  kAccelerate = 1,
  kDecelerate = 2,
  kLeftLaneChange = 3,
  kRightLaneChange = 4,
};

inline constexpr std::size_t kNumManeuvers = 5;

inline constexpr std::array<ManeuverType, kNumManeuvers> kAllManeuvers = {
    ManeuverType::kNoAction, ManeuverType::kAccelerate, ManeuverType::kDecelerate,
    ManeuverType::kLeftLaneChange, ManeuverType::kRightLaneChange};

constexpr std::size_t index_of(ManeuverType m) { return static_cast<std::size_t>(m); }

std::string_view to_string(ManeuverType m);
std::optional<ManeuverType> parse_maneuver(std::string_view name);

/// +1 for a left lane change, -1 for right, 0 otherwise.
constexpr int lane_offset(ManeuverType m) {
  switch (m) {
    case ManeuverType::kLeftLaneChange: return 1;
    case ManeuverType::kRightLaneChange: return -1;
    default: return 0;
  }
}

struct ManeuverParams {
  double accel_rate = 1.5;            // m/s^2
  double decel_rate = 2.0;            // m/s^2, magnitude
  double lane_change_duration = 3.0;  // s
  double accel_duration = 2.0;        // s
  double vmax = 35.0;                 // m/s
  double vmin = 0.0;                  // m/s

  void validate() const;
  friend bool operator==(const ManeuverParams&, const ManeuverParams&) = default;
};

/// Gains of the linear car-following law used after a lane change.
struct CarFollowingParams {
  double c1 = 5.0;  // standstill gap, m
  double c2 = 1.5;  // time gap, s
  double cd = 0.2;  // gap-error gain, 1/s^2
  double cp = 0.5;  // speed-error gain, 1/s

  void validate() const;
};

/// Reference acceleration of a follower with speed v_m behind a leader with
/// speed v_b at gap d_ra: cd*(d_ra - c1 - c2*v_m) + cp*(v_b - v_m).
double car_following_accel(const CarFollowingParams& params, double v_m, double v_b,
                           double d_ra);

/// Nominal time to complete a maneuver. NoAction uses accel_duration as its
/// planning quantum.
double maneuver_duration(ManeuverType m, const ManeuverParams& params);

struct ManeuverInstance {
  ManeuverType type = ManeuverType::kNoAction;
  double start_time = 0.0;
  VehicleState start_state;
  ManeuverParams params;

  double duration() const { return maneuver_duration(type, params); }
  double end_time() const { return start_time + duration(); }
};

/// Closed-form state of the vehicle at absolute time t >= inst.start_time.
/// Past its nominal duration a maneuver holds its terminal speed and lane.
/// Longitudinal maneuvers hold y at the centre of the start lane; a lane
/// change eases y from its start value to the centre of the adjacent lane.
/// Throws InfeasibleManeuver for a lane change off the road and
/// ContractViolation for t before the start.
VehicleState evaluate_maneuver(const ManeuverInstance& inst, double t, const RoadGeometry& road);

/// Quintic ease 10u^3 - 15u^4 + 6u^5 and its first two derivatives in u, u in [0, 1].
struct EaseSample {
  double s;
  double ds;
  double dds;
};
EaseSample quintic_ease(double u);

}  // namespace levelk
