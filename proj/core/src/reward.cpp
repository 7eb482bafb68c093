#include "levelk/reward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "levelk/error.hpp"

namespace levelk {

void RewardWeights::validate() const {
  for (double w : {collision, safety, road, objective}) {
    if (!std::isfinite(w) || w < 0.0) {
      throw InvalidArgument("reward weights must be finite and non-negative");
    }
  }
}

RewardWeights RewardWeights::scaled(double factor) const {
  return {collision * factor, safety * factor, road * factor, objective * factor};
}

void HorizonSpec::validate() const {
  if (steps < 1) throw InvalidArgument("horizon needs at least one step");
  if (!(dt > 0.0)) throw InvalidArgument("horizon step must be positive");
  if (!(gamma > 0.0) || gamma > 1.0) throw InvalidArgument("discount must lie in (0, 1]");
}

Box body_box(const VehicleState& v) { return {v.x, v.y, v.length, v.width}; }

Box envelope_box(const VehicleState& v) {
  return {v.x, v.y, kEnvelopeScale * v.length, kEnvelopeScale * v.width};
}

bool rects_overlap(const Box& a, const Box& b) {
  return std::abs(a.cx - b.cx) <= 0.5 * (a.length + b.length) &&
         std::abs(a.cy - b.cy) <= 0.5 * (a.width + b.width);
}

RewardTerms reward_terms(std::span<const VehicleState> vehicles, const RoadGeometry& road,
                         double vmax) {
  RewardTerms terms;
  const std::size_t m = vehicles.size();
  for (std::size_t i = 0; i < m && terms.safety == 0.0; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (rects_overlap(envelope_box(vehicles[i]), envelope_box(vehicles[j]))) {
        terms.safety = -1.0;
        break;
      }
    }
  }
  // The envelope contains the body, so bodies can only meet when envelopes do.
  if (terms.safety != 0.0) {
    for (std::size_t i = 0; i < m && terms.collision == 0.0; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        if (rects_overlap(body_box(vehicles[i]), body_box(vehicles[j]))) {
          terms.collision = -1.0;
          break;
        }
      }
    }
  }
  const double road_width = road.width();
  double speed_sum = 0.0;
  for (const VehicleState& v : vehicles) {
    if (v.y - 0.5 * v.width < 0.0 || v.y + 0.5 * v.width > road_width || !road.valid_lane(v.lane)) {
      terms.road = -1.0;
    }
    speed_sum += v.vx;
  }
  if (m > 0) terms.objective = std::clamp(speed_sum / static_cast<double>(m) / vmax, 0.0, 1.0);
  return terms;
}

double step_reward(std::span<const VehicleState> vehicles, const RoadGeometry& road,
                   const RewardWeights& weights, double vmax) {
  return reward_terms(vehicles, road, vmax).total(weights);
}

double step_reward(const Scene& scene, const RewardWeights& weights, double vmax) {
  return step_reward(scene.vehicles(), scene.road(), weights, vmax);
}

double trajectory_cost(std::span<const Trajectory* const> trajectories, const RoadGeometry& road,
                       const HorizonSpec& spec, const RewardWeights& weights, double vmax) {
  std::vector<VehicleState> frame(trajectories.size());
  double total = 0.0;
  double discount = 1.0;
  for (int t = 0; t < spec.steps; ++t) {
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
      frame[i] = (*trajectories[i])[static_cast<std::size_t>(t)];
    }
    total += discount * step_reward(frame, road, weights, vmax);
    discount *= spec.gamma;
  }
  return total;
}

double horizon_cost(const Scene& scene0, const PolicySchedule& schedule, const HorizonSpec& spec,
                    const RewardWeights& weights, double vmax) {
  std::vector<Trajectory> trajectories;
  trajectories.reserve(scene0.size());
  for (const VehicleState& v : scene0.vehicles()) {
    auto it = schedule.find(v.id);
    if (it == schedule.end()) {
      throw ContractViolation("schedule has no policy for vehicle " + std::to_string(v.id));
    }
    if (it->second.start_time() > scene0.time() + 1e-9) {
      throw ContractViolation("policy of vehicle " + std::to_string(v.id) +
                              " starts after the scene time");
    }
    trajectories.push_back(
        sample_trajectory(it->second, scene0.time(), spec.steps, spec.dt, scene0.road()));
  }
  std::vector<const Trajectory*> refs;
  for (const Trajectory& t : trajectories) refs.push_back(&t);
  return trajectory_cost(refs, scene0.road(), spec, weights, vmax);
}

std::vector<JointLevelTerm> joint_level_terms(std::span<const LevelBelief> beliefs,
                                              std::size_t max_joint) {
  for (const LevelBelief& b : beliefs) b.validate();
  const std::size_t n = beliefs.size();
  std::size_t combos = 1;
  bool exact = true;
  for (std::size_t i = 0; i < n; ++i) {
    combos *= kNumLevels;
    if (combos > max_joint) {
      exact = false;
      break;
    }
  }
  if (!exact) {
    JointLevelTerm term{std::vector<int>(n), 1.0};
    for (std::size_t i = 0; i < n; ++i) term.levels[i] = beliefs[i].most_likely();
    return {term};
  }

  std::vector<JointLevelTerm> terms;
  std::vector<int> levels(n, 0);
  for (std::size_t c = 0; c < combos; ++c) {
    double weight = 1.0;
    for (std::size_t i = 0; i < n; ++i) weight *= beliefs[i].p[levels[i]];
    if (weight > 0.0) terms.push_back({levels, weight});
    for (std::size_t i = n; i-- > 0;) {
      if (++levels[i] < kNumLevels) break;
      levels[i] = 0;
    }
  }
  return terms;
}

double belief_weighted_cost(const Scene& scene0, const Policy& target_policy,
                            const BeliefMap& beliefs, const LevelPolicyTable& level_policies,
                            const HorizonSpec& spec, const RewardWeights& weights, double vmax) {
  std::vector<VehicleId> others;
  std::vector<LevelBelief> belief_list;
  for (const VehicleState& v : scene0.vehicles()) {
    if (v.id == scene0.target_id()) continue;
    auto b = beliefs.find(v.id);
    if (b == beliefs.end()) {
      throw ContractViolation("no level belief for vehicle " + std::to_string(v.id));
    }
    if (!level_policies.contains(v.id)) {
      throw ContractViolation("no level policies for vehicle " + std::to_string(v.id));
    }
    others.push_back(v.id);
    belief_list.push_back(b->second);
  }

  double expected = 0.0;
  for (const JointLevelTerm& term : joint_level_terms(belief_list)) {
    PolicySchedule schedule;
    schedule.emplace(scene0.target_id(), target_policy);
    for (std::size_t i = 0; i < others.size(); ++i) {
      schedule.emplace(others[i], level_policies.at(others[i])[term.levels[i]]);
    }
    expected += term.weight * horizon_cost(scene0, schedule, spec, weights, vmax);
  }
  return expected;
}

}  // namespace levelk
