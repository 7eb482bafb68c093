#include "levelk/maneuver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "levelk/error.hpp"

namespace levelk {
namespace {

// Chained start times accumulate rounding; anything this close counts as the start.
constexpr double kTimeSlack = 1e-9;

struct Longitudinal {
  double x;
  double vx;
  double ax;
};

// Constant acceleration `rate` (signed) for at most `active` seconds, then coast.
Longitudinal ramp(double x0, double vx0, double rate, double active, double tau) {
  const double t1 = std::min(tau, active);
  const double v1 = vx0 + rate * t1;
  return {x0 + vx0 * t1 + 0.5 * rate * t1 * t1 + v1 * (tau - t1), v1, tau < active ? rate : 0.0};
}

}  // namespace

std::string_view to_string(ManeuverType m) {
  switch (m) {
    case ManeuverType::kNoAction: return "NoAction";
    case ManeuverType::kAccelerate: return "Accelerate";
    case ManeuverType::kDecelerate: return "Decelerate";
    case ManeuverType::kLeftLaneChange: return "LeftLaneChange";
    case ManeuverType::kRightLaneChange: return "RightLaneChange";
  }
  return "Unknown";
}

std::optional<ManeuverType> parse_maneuver(std::string_view name) {
  for (ManeuverType m : kAllManeuvers) {
    if (to_string(m) == name) return m;
  }
  if (name == "Maintain") return ManeuverType::kNoAction;
  return std::nullopt;
}

void ManeuverParams::validate() const {
  if (!(accel_rate > 0.0) || !(decel_rate > 0.0) || !(lane_change_duration > 0.0) ||
      !(accel_duration > 0.0) || !(vmin >= 0.0) || !(vmax > vmin)) {
    throw InvalidArgument(
        "maneuver parameters need positive rates and durations and vmax > vmin >= 0");
  }
}

void CarFollowingParams::validate() const {
  if (!(c1 > 0.0) || !(c2 > 0.0) || !(cd > 0.0) || !(cp > 0.0)) {
    throw InvalidArgument("car-following gains c1, c2, cd, cp must be positive");
  }
}

double car_following_accel(const CarFollowingParams& params, double v_m, double v_b,
                           double d_ra) {
  const double d_ref = params.c1 + params.c2 * v_m;
  const double d_err = d_ra - d_ref;
  return params.cd * d_err + params.cp * (v_b - v_m);
}

double maneuver_duration(ManeuverType m, const ManeuverParams& params) {
  switch (m) {
    case ManeuverType::kLeftLaneChange:
    case ManeuverType::kRightLaneChange:
      return params.lane_change_duration;
    default:
      return params.accel_duration;
  }
}

EaseSample quintic_ease(double u) {
  const double u2 = u * u;
  const double u3 = u2 * u;
  return {u3 * (10.0 - 15.0 * u + 6.0 * u2), 30.0 * u2 * (1.0 - 2.0 * u + u2),
          60.0 * u * (1.0 - 3.0 * u + 2.0 * u2)};
}

VehicleState evaluate_maneuver(const ManeuverInstance& inst, double t, const RoadGeometry& road) {
  double tau = t - inst.start_time;
  if (tau < -kTimeSlack) {
    throw ContractViolation("maneuver evaluated " + std::to_string(-tau) +
                            " s before its start time");
  }
  tau = std::max(tau, 0.0);

  const VehicleState& s0 = inst.start_state;
  const ManeuverParams& p = inst.params;
  VehicleState out = s0;
  out.vy = 0.0;
  out.ay = 0.0;
  // Longitudinal maneuvers keep the vehicle on its lane centre.
  if (road.valid_lane(s0.lane)) out.y = road.lane_center(s0.lane);

  switch (inst.type) {
    case ManeuverType::kNoAction: {
      out.x = s0.x + s0.vx * tau;
      out.ax = 0.0;
      break;
    }
    case ManeuverType::kAccelerate: {
      const double active =
          s0.vx >= p.vmax ? 0.0 : std::min(p.accel_duration, (p.vmax - s0.vx) / p.accel_rate);
      const Longitudinal l = ramp(s0.x, s0.vx, p.accel_rate, active, tau);
      out.x = l.x;
      out.vx = std::min(l.vx, std::max(p.vmax, s0.vx));
      out.ax = l.ax;
      break;
    }
    case ManeuverType::kDecelerate: {
      const double active =
          s0.vx <= p.vmin ? 0.0 : std::min(p.accel_duration, (s0.vx - p.vmin) / p.decel_rate);
      const Longitudinal l = ramp(s0.x, s0.vx, -p.decel_rate, active, tau);
      out.x = l.x;
      out.vx = std::max(l.vx, std::min(p.vmin, s0.vx));
      out.ax = l.ax;
      break;
    }
    case ManeuverType::kLeftLaneChange:
    case ManeuverType::kRightLaneChange: {
      const int target = s0.lane + lane_offset(inst.type);
      if (!road.valid_lane(target)) {
        throw InfeasibleManeuver(std::string(to_string(inst.type)) + " from lane " +
                                 std::to_string(s0.lane) + " leaves the road");
      }
      const double shift = road.lane_center(target) - s0.y;
      const double T = p.lane_change_duration;
      const EaseSample e = quintic_ease(std::min(tau / T, 1.0));
      out.x = s0.x + s0.vx * tau;
      out.ax = 0.0;
      out.y = tau >= T ? road.lane_center(target) : s0.y + shift * e.s;
      out.vy = shift * e.ds / T;
      out.ay = shift * e.dds / (T * T);
      const double d_new = std::abs(out.y - road.lane_center(target));
      const double d_old = std::abs(out.y - road.lane_center(s0.lane));
      out.lane = d_new < d_old ? target : s0.lane;
      break;
    }
  }
  return out;
}

}  // namespace levelk
