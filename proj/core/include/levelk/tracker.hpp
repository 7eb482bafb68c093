#pragma once

#include <map>
#include <optional>
#include <vector>

#include "levelk/belief.hpp"
#include "levelk/classifier.hpp"
#include "levelk/pipeline.hpp"
#include "levelk/reward.hpp"
#include "levelk/solver.hpp"

namespace levelk {

struct TrackerConfig {
  SolverConfig solver;
  RewardWeights weights;
  BeliefConfig belief;
  double fusion_temperature = 1.0;
};

struct FramePrediction {
  VehicleId ego = 0;
  long frame = 0;
  double t = 0.0;
  ProbabilityVector interaction{};
  std::optional<ProbabilityVector> motion;
  ProbabilityVector fused{};
  BeliefMap beliefs;  // beliefs used for this frame, scene vehicles only
  Prediction detail;

  ManeuverType interaction_maneuver() const { return kAllManeuvers[argmax(interaction)]; }
  std::optional<ManeuverType> motion_maneuver() const;
  ManeuverType fused_maneuver() const { return kAllManeuvers[argmax(fused)]; }
};

/// Scene of an ego frame with the ego as target. Speeds are clamped to >= 0
/// and lanes re-derived from y where they disagree with the lateral position.
Scene scene_from_frame(const EgoFrame& frame, const RoadGeometry& road);

/// Runs the interaction predictor frame by frame for one target vehicle,
/// reinforcing each neighbour's level belief from what it actually did since
/// the previous frame.
class PredictionSession {
 public:
  PredictionSession(TrackerConfig config, RoadGeometry road, BeliefMap initial = {},
                    const MotionModel* motion = nullptr);

  /// Processes frame `index` of the package. Frames must be fed in increasing order.
  FramePrediction observe(const EgoPackage& package, std::size_t index);

  const BeliefMap& beliefs() const { return beliefs_; }

 private:
  void update_beliefs(const Scene& measured);
  void refresh_hypotheses(const Scene& scene, const LevelPolicyTable& levels);

  TrackerConfig config_;
  RoadGeometry road_;
  BeliefMap beliefs_;
  const MotionModel* motion_;
  std::optional<Scene> previous_scene_;
  std::map<VehicleId, LevelPolicies> hypotheses_;  // level-k policy each neighbour may be following
};

/// Observes every `stride`-th frame of the package.
std::vector<FramePrediction> predict_package(const EgoPackage& package, PredictionSession& session,
                                             int stride = 1);

}  // namespace levelk
