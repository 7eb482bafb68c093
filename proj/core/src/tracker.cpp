#include "levelk/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "levelk/error.hpp"

namespace levelk {

std::optional<ManeuverType> FramePrediction::motion_maneuver() const {
  if (!motion) return std::nullopt;
  return kAllManeuvers[argmax(*motion)];
}

Scene scene_from_frame(const EgoFrame& frame, const RoadGeometry& road) {
  std::vector<VehicleState> vehicles;
  vehicles.reserve(frame.neighbors.size() + 1);
  auto add = [&](VehicleState s) {
    s.vx = std::max(s.vx, 0.0);
    if (!road.valid_lane(s.lane) ||
        std::abs(s.y - road.lane_center(s.lane)) > 0.5 * road.lane_width + 0.5 * s.width) {
      s.lane = road.lane_at(s.y);
      if (std::abs(s.y - road.lane_center(s.lane)) > 0.5 * road.lane_width + 0.5 * s.width) {
        s.y = std::clamp(s.y, 0.0, road.width());
      }
    }
    vehicles.push_back(s);
  };
  add(frame.ego);
  for (const VehicleState& n : frame.neighbors) add(n);
  return Scene(frame.t, std::move(vehicles), road, frame.ego.id);
}

PredictionSession::PredictionSession(TrackerConfig config, RoadGeometry road, BeliefMap initial,
                                     const MotionModel* motion)
    : config_(config), road_(road), beliefs_(std::move(initial)), motion_(motion) {
  config_.belief.validate();
  config_.solver.validate();
  road_.validate();
}

void PredictionSession::update_beliefs(const Scene& measured) {
  std::vector<VehicleState> measured_states;
  for (const VehicleState& v : measured.vehicles()) {
    if (previous_scene_->contains(v.id)) measured_states.push_back(v);
  }
  const double t = measured.time();
  const Scene measured_common = measured.with_vehicles(t, measured_states);

  // The distance is a sum over vehicles, so only the modelled vehicle's own
  // simulated state separates the levels; everyone else is taken as measured.
  for (std::size_t i = 0; i < measured_states.size(); ++i) {
    const VehicleId id = measured_states[i].id;
    const auto hyp = hypotheses_.find(id);
    if (id == measured.target_id() || hyp == hypotheses_.end()) continue;
    std::array<Scene, kNumLevels> scenes{measured_common, measured_common, measured_common};
    for (int k = 0; k < kNumLevels; ++k) {
      std::vector<VehicleState> states = measured_states;
      states[i] = hyp->second[k].state_at(t, road_);
      states[i].id = id;
      scenes[k] = measured.with_vehicles(t, std::move(states));
    }
    beliefs_[id] = update_belief(beliefs_.at(id), scenes, measured_common, config_.belief);
  }
}

void PredictionSession::refresh_hypotheses(const Scene& scene, const LevelPolicyTable& levels) {
  const double t = scene.time();
  for (const auto& [id, policies] : levels) {
    if (id == scene.target_id()) continue;
    auto [it, fresh] = hypotheses_.try_emplace(id, policies);
    if (fresh) continue;
    // A hypothesis is kept until its first maneuver completes, as an agent would.
    for (int k = 0; k < kNumLevels; ++k) {
      if (it->second[k].maneuvers.front().end_time() <= t + 1e-9) it->second[k] = policies[k];
    }
  }
  std::erase_if(hypotheses_, [&](const auto& entry) { return !scene.contains(entry.first); });
}

FramePrediction PredictionSession::observe(const EgoPackage& package, std::size_t index) {
  const EgoFrame& frame = package.frames.at(index);
  const Scene scene = scene_from_frame(frame, road_);
  for (const VehicleState& v : scene.vehicles()) {
    if (v.id != scene.target_id() && !beliefs_.contains(v.id)) {
      beliefs_.emplace(v.id, LevelBelief{v.id, config_.belief.initial, 0});
    }
  }
  if (previous_scene_ && previous_scene_->time() < scene.time()) {
    update_beliefs(scene);
  }

  FramePrediction out;
  out.ego = package.ego_id;
  out.frame = frame.frame;
  out.t = frame.t;
  for (const VehicleState& v : scene.vehicles()) {
    if (v.id != scene.target_id()) out.beliefs.emplace(v.id, beliefs_.at(v.id));
  }
  out.detail = predict_target(scene, out.beliefs, config_.solver, config_.weights);
  out.interaction = interaction_prior(out.detail.first_maneuver_values, config_.fusion_temperature);
  if (motion_) {
    out.motion = motion_->predict_proba(extract_features(package, index, road_, motion_->features));
    out.fused = fuse(*out.motion, out.interaction);
  } else {
    out.fused = out.interaction;
  }
  refresh_hypotheses(scene, out.detail.levels);
  previous_scene_ = scene;
  return out;
}

std::vector<FramePrediction> predict_package(const EgoPackage& package, PredictionSession& session,
                                             int stride) {
  if (stride < 1) throw InvalidArgument("prediction stride must be at least 1");
  std::vector<FramePrediction> out;
  for (std::size_t i = 0; i < package.frames.size(); i += static_cast<std::size_t>(stride)) {
    out.push_back(session.observe(package, i));
  }
  return out;
}

}  // namespace levelk
