#include "levelk/scene.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "levelk/error.hpp"

namespace levelk {

int RoadGeometry::lane_at(double y) const {
  const int lane = static_cast<int>(std::floor(y / lane_width));
  return std::clamp(lane, 0, num_lanes - 1);
}

void RoadGeometry::validate() const {
  if (num_lanes < 1) throw InvalidArgument("road needs at least one lane");
  if (!(lane_width > 0.0)) throw InvalidArgument("lane width must be positive");
}

void validate_state(const VehicleState& s, const RoadGeometry& road) {
  const std::string who = "vehicle " + std::to_string(s.id);
  if (!(s.length > 0.0) || !(s.width > 0.0)) {
    throw InvalidArgument(who + ": length and width must be positive");
  }
  if (s.vx < 0.0) throw InvalidArgument(who + ": negative longitudinal speed");
  if (std::abs(s.y - road.lane_center(s.lane)) > 0.5 * road.lane_width + 0.5 * s.width + 1e-9) {
    throw InvalidArgument(who + ": lane " + std::to_string(s.lane) +
                          " inconsistent with lateral position " + std::to_string(s.y));
  }
}

Scene::Scene(double time, std::vector<VehicleState> vehicles, RoadGeometry road,
             VehicleId target_id)
    : time_(time), vehicles_(std::move(vehicles)), road_(road), target_id_(target_id) {
  road_.validate();
  if (vehicles_.empty()) throw InvalidArgument("scene needs at least one vehicle");
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    validate_state(vehicles_[i], road_);
    for (std::size_t j = 0; j < i; ++j) {
      if (vehicles_[i].id == vehicles_[j].id) {
        throw InvalidArgument("duplicate vehicle id " + std::to_string(vehicles_[i].id));
      }
    }
  }
  if (!contains(target_id_)) {
    throw InvalidArgument("target vehicle " + std::to_string(target_id_) + " not in scene");
  }
}

bool Scene::contains(VehicleId id) const {
  return std::any_of(vehicles_.begin(), vehicles_.end(),
                     [id](const VehicleState& v) { return v.id == id; });
}

std::size_t Scene::index_of(VehicleId id) const {
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    if (vehicles_[i].id == id) return i;
  }
  throw NotFound("vehicle " + std::to_string(id) + " not in scene");
}

const VehicleState& Scene::at(VehicleId id) const { return vehicles_[index_of(id)]; }

Scene Scene::with_vehicles(double time, std::vector<VehicleState> vehicles) const {
  return Scene(time, std::move(vehicles), road_, target_id_);
}

Scene step_scene(const Scene& scene, const ManeuverAssignment& assignments, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("step size must be positive");
  const double t = scene.time() + dt;
  std::vector<VehicleState> next;
  next.reserve(scene.size());
  for (const VehicleState& v : scene.vehicles()) {
    auto it = assignments.find(v.id);
    if (it == assignments.end()) {
      throw ContractViolation("no maneuver assigned to vehicle " + std::to_string(v.id));
    }
    if (it->second.start_time > scene.time() + 1e-9) {
      throw ContractViolation("maneuver of vehicle " + std::to_string(v.id) +
                              " starts after the scene time");
    }
    next.push_back(evaluate_maneuver(it->second, t, scene.road()));
    next.back().id = v.id;
  }
  return scene.with_vehicles(t, std::move(next));
}

std::vector<RelativeState> relative_frame(const Scene& scene, VehicleId host_id) {
  const VehicleState& host = scene.at(host_id);
  std::vector<RelativeState> out;
  out.reserve(scene.size() - 1);
  for (const VehicleState& v : scene.vehicles()) {
    if (v.id == host_id) continue;
    out.push_back({v.id, v.x - host.x, v.y - host.y, v.vx, v.vy});
  }
  return out;
}

}  // namespace levelk
