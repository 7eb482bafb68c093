#pragma once

#include <array>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "levelk/belief.hpp"
#include "levelk/policy.hpp"
#include "levelk/scene.hpp"

namespace levelk {

/// Weights of the collision, safety, road-rule and objective terms.
struct RewardWeights {
  double collision = 10.0;
  double safety = 2.0;
  double road = 5.0;
  double objective = 1.0;

  void validate() const;
  RewardWeights scaled(double factor) const;
};

struct HorizonSpec {
  int steps = 100;
  double dt = kDefaultDt;
  double gamma = 0.99;

  double length() const { return steps * dt; }
  void validate() const;
};

/// Axis-aligned rectangle in the road frame.
struct Box {
  double cx;
  double cy;
  double length;
  double width;
};

inline constexpr double kEnvelopeScale = 1.25;

Box body_box(const VehicleState& v);
Box envelope_box(const VehicleState& v);

/// True when the rectangles intersect; touching edges count as overlap.
bool rects_overlap(const Box& a, const Box& b);

struct RewardTerms {
  double collision = 0.0;  // -1 if any two bodies overlap
  double safety = 0.0;     // -1 if any two safety envelopes overlap
  double road = 0.0;       // -1 if any body leaves the road laterally or sits in an invalid lane
  double objective = 0.0;  // mean vx / vmax, clipped to [0, 1]

  double total(const RewardWeights& w) const {
    return w.collision * collision + w.safety * safety + w.road * road + w.objective * objective;
  }
};

RewardTerms reward_terms(std::span<const VehicleState> vehicles, const RoadGeometry& road,
                         double vmax);

double step_reward(std::span<const VehicleState> vehicles, const RoadGeometry& road,
                   const RewardWeights& weights, double vmax);
double step_reward(const Scene& scene, const RewardWeights& weights, double vmax);

/// Discounted sum over pre-sampled trajectories (one per vehicle, each at
/// least spec.steps long): sum_{t < steps} gamma^t * step_reward(s_t).
double trajectory_cost(std::span<const Trajectory* const> trajectories, const RoadGeometry& road,
                       const HorizonSpec& spec, const RewardWeights& weights, double vmax);

using PolicySchedule = std::map<VehicleId, Policy>;

/// Rolls the scene forward under the schedule and returns the discounted
/// cost. Throws ContractViolation if a vehicle has no policy.
double horizon_cost(const Scene& scene0, const PolicySchedule& schedule, const HorizonSpec& spec,
                    const RewardWeights& weights, double vmax);

using LevelPolicies = std::array<Policy, kNumLevels>;
using LevelPolicyTable = std::map<VehicleId, LevelPolicies>;

/// One term of the expectation over joint opponent levels.
struct JointLevelTerm {
  std::vector<int> levels;  // parallel to the belief list
  double weight;
};

/// Largest number of joint level assignments expanded exactly; above it every
/// opponent is pinned at its most likely level.
inline constexpr std::size_t kMaxJointAssignments = 81;

/// Terms of the expectation over independent per-vehicle beliefs, in
/// lexicographic level order with the first belief varying slowest. Zero-weight
/// terms are dropped. Throws InvalidArgument for unnormalized beliefs.
std::vector<JointLevelTerm> joint_level_terms(std::span<const LevelBelief> beliefs,
                                              std::size_t max_joint = kMaxJointAssignments);

/// Expected discounted cost of the target policy when every non-target i
/// replays level_policies[i][k] with probability beliefs[i].p[k].
double belief_weighted_cost(const Scene& scene0, const Policy& target_policy,
                            const BeliefMap& beliefs, const LevelPolicyTable& level_policies,
                            const HorizonSpec& spec, const RewardWeights& weights, double vmax);

}  // namespace levelk
