#include "levelk/solver.hpp"

#include <algorithm>
#include <string>

#include "levelk/error.hpp"

namespace levelk {
namespace {

constexpr double kCoverSlack = 1e-9;

void enumerate_from(PolicySkeleton& prefix, double covered, int lane, const RoadGeometry& road,
                    const SolverConfig& config, std::vector<PolicySkeleton>& out) {
  const double horizon = config.horizon.length();
  for (ManeuverType m : kAllManeuvers) {
    const int next_lane = lane + lane_offset(m);
    if (!road.valid_lane(next_lane)) continue;
    prefix.push_back(m);
    const double total = covered + maneuver_duration(m, config.maneuver);
    if (total >= horizon - kCoverSlack ||
        static_cast<int>(prefix.size()) == config.max_sequence_depth) {
      out.push_back(prefix);
    } else {
      enumerate_from(prefix, total, next_lane, road, config, out);
    }
    prefix.pop_back();
  }
}

// Lazily sampled trajectories of every vehicle's candidate policies.
class Planner {
 public:
  Planner(const Scene& scene, const SolverConfig& config, const RewardWeights& weights)
      : scene_(scene), config_(config), weights_(weights) {
    config_.validate();
    weights_.validate();
    const std::size_t m = scene.size();
    options_.resize(m);
    option_trajectories_.resize(m);
    holds_.resize(m);
    for (std::size_t v = 0; v < m; ++v) {
      options_[v] = enumerate_policies(scene.vehicles()[v], scene.road(), config_);
      option_trajectories_[v].resize(options_[v].size());
    }
  }

  std::size_t size() const { return scene_.size(); }
  const Scene& scene() const { return scene_; }
  const std::vector<PolicySkeleton>& options(std::size_t v) const { return options_[v]; }

  const Trajectory& option_trajectory(std::size_t v, std::size_t k) {
    std::optional<Trajectory>& slot = option_trajectories_[v][k];
    if (!slot) slot = sample(make_policy(v, k, 0));
    return *slot;
  }

  const Trajectory& hold_trajectory(std::size_t v) {
    std::optional<Trajectory>& slot = holds_[v];
    if (!slot) slot = sample(hold_policy(scene_.vehicles()[v], scene_.time(), config_.maneuver));
    return *slot;
  }

  Trajectory sample(const Policy& p) const {
    return sample_trajectory(p, scene_.time(), config_.horizon.steps, config_.horizon.dt,
                             scene_.road());
  }

  Policy make_policy(std::size_t v, std::size_t k, int level) const {
    return instantiate_policy(scene_.vehicles()[v], scene_.time(), options_[v][k],
                              config_.maneuver, scene_.road(), level);
  }

  double cost(std::span<const Trajectory* const> trajectories) const {
    return trajectory_cost(trajectories, scene_.road(), config_.horizon, weights_,
                           config_.maneuver.vmax);
  }

  struct Best {
    std::size_t option;
    double value;
  };

  // `rollout` holds every vehicle's trajectory; the ego slot is overwritten.
  Best best_response(std::size_t ego, std::vector<const Trajectory*> rollout) {
    Best best{0, 0.0};
    for (std::size_t k = 0; k < options_[ego].size(); ++k) {
      rollout[ego] = &option_trajectory(ego, k);
      const double value = cost(rollout);
      if (k == 0 || value > best.value) best = {k, value};
    }
    return best;
  }

 private:
  const Scene& scene_;
  SolverConfig config_;
  RewardWeights weights_;
  std::vector<std::vector<PolicySkeleton>> options_;
  std::vector<std::vector<std::optional<Trajectory>>> option_trajectories_;
  std::vector<std::optional<Trajectory>> holds_;
};

// Option index chosen by each vehicle at each level.
using LevelChoices = std::vector<std::array<std::size_t, kNumLevels>>;

LevelChoices solve_choices(Planner& planner, int max_level) {
  const std::size_t m = planner.size();
  LevelChoices choices(m);
  std::vector<const Trajectory*> rollout(m);
  for (std::size_t v = 0; v < m; ++v) rollout[v] = &planner.hold_trajectory(v);
  for (std::size_t v = 0; v < m; ++v) choices[v][0] = planner.best_response(v, rollout).option;
  for (int k = 1; k <= max_level; ++k) {
    for (std::size_t v = 0; v < m; ++v) {
      for (std::size_t j = 0; j < m; ++j) {
        rollout[j] = &planner.option_trajectory(j, choices[j][k - 1]);
      }
      choices[v][k] = planner.best_response(v, rollout).option;
    }
  }
  return choices;
}

}  // namespace

namespace {

void check_coverage(const SolverConfig& config) {
  double longest = 0.0;
  for (ManeuverType m : kAllManeuvers) {
    longest = std::max(longest, maneuver_duration(m, config.maneuver));
  }
  if (config.max_sequence_depth * longest < config.horizon.length() - kCoverSlack) {
    throw ConfigError("horizon of " + std::to_string(config.horizon.length()) +
                      " s not coverable with " + std::to_string(config.max_sequence_depth) +
                      " maneuvers");
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (max_sequence_depth < 1) throw ConfigError("max_sequence_depth must be at least 1");
  try {
    horizon.validate();
    maneuver.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  check_coverage(*this);
}

std::vector<PolicySkeleton> enumerate_policies(const VehicleState& vehicle,
                                               const RoadGeometry& road,
                                               const SolverConfig& config) {
  check_coverage(config);
  std::vector<PolicySkeleton> out;
  PolicySkeleton prefix;
  enumerate_from(prefix, 0.0, vehicle.lane, road, config, out);
  return out;
}

Policy solve_level0(const Scene& scene, VehicleId ego, const SolverConfig& config,
                    const RewardWeights& weights) {
  Planner planner(scene, config, weights);
  const std::size_t e = scene.index_of(ego);
  std::vector<const Trajectory*> rollout(scene.size());
  for (std::size_t v = 0; v < scene.size(); ++v) rollout[v] = &planner.hold_trajectory(v);
  return planner.make_policy(e, planner.best_response(e, rollout).option, 0);
}

Policy solve_level_k(const Scene& scene, VehicleId ego, int k,
                     const std::map<VehicleId, Policy>& lower_level, const SolverConfig& config,
                     const RewardWeights& weights) {
  if (k < 1 || k > kMaxLevel) throw InvalidArgument("level must be 1 or 2");
  Planner planner(scene, config, weights);
  const std::size_t e = scene.index_of(ego);
  std::vector<Trajectory> opponents(scene.size());
  std::vector<const Trajectory*> rollout(scene.size());
  for (std::size_t v = 0; v < scene.size(); ++v) {
    if (v == e) continue;
    const VehicleId id = scene.vehicles()[v].id;
    auto it = lower_level.find(id);
    if (it == lower_level.end()) {
      throw ContractViolation("no level-" + std::to_string(k - 1) + " policy for vehicle " +
                              std::to_string(id));
    }
    opponents[v] = planner.sample(it->second);
    rollout[v] = &opponents[v];
  }
  return planner.make_policy(e, planner.best_response(e, rollout).option, k);
}

LevelPolicyTable solve_level_hierarchy(const Scene& scene, const SolverConfig& config,
                                       const RewardWeights& weights, int max_level) {
  if (max_level < 0 || max_level > kMaxLevel) throw InvalidArgument("max_level out of range");
  Planner planner(scene, config, weights);
  const LevelChoices choices = solve_choices(planner, max_level);
  LevelPolicyTable table;
  for (std::size_t v = 0; v < scene.size(); ++v) {
    LevelPolicies levels;
    for (int k = 0; k <= max_level; ++k) levels[k] = planner.make_policy(v, choices[v][k], k);
    table.emplace(scene.vehicles()[v].id, std::move(levels));
  }
  return table;
}

Prediction predict_target(const Scene& scene, const BeliefMap& beliefs, const SolverConfig& config,
                          const RewardWeights& weights) {
  Planner planner(scene, config, weights);
  const std::size_t target = scene.index_of(scene.target_id());
  const std::size_t m = scene.size();

  std::vector<std::size_t> others;
  std::vector<LevelBelief> belief_list;
  for (std::size_t v = 0; v < m; ++v) {
    if (v == target) continue;
    const VehicleId id = scene.vehicles()[v].id;
    auto it = beliefs.find(id);
    if (it == beliefs.end()) {
      throw ContractViolation("no level belief for vehicle " + std::to_string(id));
    }
    others.push_back(v);
    belief_list.push_back(it->second);
  }
  const std::vector<JointLevelTerm> terms = joint_level_terms(belief_list);
  const LevelChoices choices = solve_choices(planner, kMaxLevel);

  Prediction out;
  std::vector<const Trajectory*> rollout(m);
  std::size_t best = 0;
  const auto& options = planner.options(target);
  out.candidates.reserve(options.size());
  for (std::size_t k = 0; k < options.size(); ++k) {
    rollout[target] = &planner.option_trajectory(target, k);
    double expected = 0.0;
    for (const JointLevelTerm& term : terms) {
      for (std::size_t i = 0; i < others.size(); ++i) {
        const std::size_t v = others[i];
        rollout[v] = &planner.option_trajectory(v, choices[v][term.levels[i]]);
      }
      expected += term.weight * planner.cost(rollout);
    }
    out.candidates.push_back({options[k], expected});
    if (k == 0 || expected > out.value) {
      best = k;
      out.value = expected;
    }
    auto& slot = out.first_maneuver_values[index_of(options[k].front())];
    if (!slot || expected > *slot) slot = expected;
  }

  out.policy = planner.make_policy(target, best, kTargetLevel);
  for (std::size_t v = 0; v < m; ++v) {
    LevelPolicies levels;
    for (int k = 0; k <= kMaxLevel; ++k) levels[k] = planner.make_policy(v, choices[v][k], k);
    out.levels.emplace(scene.vehicles()[v].id, std::move(levels));
  }
  return out;
}

}  // namespace levelk
