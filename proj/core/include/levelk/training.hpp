#pragma once

#include <cstdint>
#include <vector>

#include "levelk/classifier.hpp"
#include "levelk/pipeline.hpp"

namespace levelk {

struct TrainingSet {
  std::vector<FeatureVector> features;
  std::vector<ManeuverType> labels;
};

/// Adds every `spacing`-th frame of the package, labeled with the maneuver
/// the ground truth has active at that frame. Unlabeled frames are skipped.
void append_samples(TrainingSet& set, const EgoPackage& package, const GroundTruth& truth,
                    const RoadGeometry& road, const FeatureConfig& features, int spacing);

/// Standardizes the set and trains the one-vs-rest classifier on it.
MotionModel fit_motion_model(const TrainingSet& set, const FeatureConfig& features,
                             const SvmHyperparams& hyper, TrainingDiagnostics* diagnostics = nullptr);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;  // both sorted ascending
};

/// Seeded shuffle of 0..n-1 cut at round(fraction * n), keeping at least one
/// item on each side when n >= 2.
SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t seed);

}  // namespace levelk
