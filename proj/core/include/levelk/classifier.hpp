#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "levelk/maneuver.hpp"
#include "levelk/pipeline.hpp"

namespace levelk {

inline constexpr int kFeatureSchemaVersion = 1;

struct FeatureConfig {
  int history = 10;              // frames per feature vector
  double history_spacing = 0.1;  // s between history frames
  int neighbor_cap = 6;

  int per_frame() const { return 3 + 5 * neighbor_cap; }
  int dimension() const { return history * per_frame(); }
  void validate() const;
};

using FeatureVector = std::vector<double>;
using ProbabilityVector = std::array<double, kNumManeuvers>;

/// Motion features at one frame of a package: for each history frame (oldest
/// first) the ego's offset from its lane centre, vy and vx, then dx, dy, dvx,
/// dvy and a presence flag for the nearest neighbours (zero-filled slots).
/// Frames before the package start repeat the first frame.
FeatureVector extract_features(const EgoPackage& package, std::size_t frame_index,
                               const RoadGeometry& road, const FeatureConfig& config);

/// Per-dimension mean and population standard deviation of a training set.
/// Constant dimensions are dropped.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::size_t input_dim, std::vector<std::size_t> kept, std::vector<double> mean,
               std::vector<double> stddev);

  /// Needs >= 2 samples of equal dimension.
  static Standardizer fit(std::span<const FeatureVector> samples);

  FeatureVector apply(std::span<const double> x) const;
  /// Maps a standardized vector back onto the kept dimensions.
  FeatureVector invert(std::span<const double> z) const;

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return kept_.size(); }
  const std::vector<std::size_t>& kept() const { return kept_; }
  std::vector<std::size_t> dropped() const;
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return stddev_; }

 private:
  std::size_t input_dim_ = 0;
  std::vector<std::size_t> kept_;
  std::vector<double> mean_;    // per kept dimension
  std::vector<double> stddev_;  // per kept dimension
};

struct SvmHyperparams {
  double c = 1.0;          // inverse regularization strength
  int max_epochs = 200;    // full-batch gradient iterations
  double tolerance = 1e-7; // relative objective change that stops training early
};

struct TrainingDiagnostics {
  std::array<std::vector<double>, kNumManeuvers> loss_history;  // objective per epoch, per class
  double training_accuracy = 0.0;
  std::array<std::size_t, kNumManeuvers> class_counts{};
};

/// One-vs-rest linear maximum-margin classifiers on standardized features.
struct LinearSvm {
  std::array<std::vector<double>, kNumManeuvers> weights;
  std::array<double, kNumManeuvers> biases{};

  std::array<double, kNumManeuvers> margins(std::span<const double> z) const;
  std::size_t dimension() const { return weights[0].size(); }
};

/// Minimizes ||w||^2 / (2 C n) + mean squared hinge loss per class by gradient
/// descent with backtracking line search, so each class objective never
/// increases between epochs. Deterministic. Throws InvalidArgument with fewer
/// than two distinct labels.
LinearSvm train_classifier(std::span<const FeatureVector> standardized,
                           std::span<const ManeuverType> labels, const SvmHyperparams& hyper,
                           TrainingDiagnostics* diagnostics = nullptr);

/// Softmax over margins.
ProbabilityVector softmax(std::span<const double> scores, double temperature = 1.0);

struct MotionModel {
  FeatureConfig features;
  Standardizer standardizer;
  LinearSvm svm;
  SvmHyperparams hyper;

  /// Throws InvalidArgument when the raw feature dimension does not match.
  ProbabilityVector predict_proba(std::span<const double> raw_features) const;
  ManeuverType predict(std::span<const double> raw_features) const;
};

nlohmann::json model_to_json(const MotionModel& model);
MotionModel model_from_json(const nlohmann::json& j);

std::size_t argmax(const ProbabilityVector& p);

/// Softmax prior over the expected rewards of each feasible first maneuver;
/// infeasible maneuvers (empty entries) get probability 0.
ProbabilityVector interaction_prior(
    const std::array<std::optional<double>, kNumManeuvers>& first_maneuver_values,
    double temperature = 1.0);

/// Product of experts: normalize(prior * motion). Falls back to the prior when
/// the product vanishes; throws InvalidArgument when both inputs are all zero.
ProbabilityVector fuse(const ProbabilityVector& motion, const ProbabilityVector& prior);

}  // namespace levelk
