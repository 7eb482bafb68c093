#include "levelk/training.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "levelk/error.hpp"

namespace levelk {

void append_samples(TrainingSet& set, const EgoPackage& package, const GroundTruth& truth,
                    const RoadGeometry& road, const FeatureConfig& features, int spacing) {
  if (spacing < 1) throw InvalidArgument("sample spacing must be at least 1");
  for (std::size_t i = 0; i < package.frames.size(); i += static_cast<std::size_t>(spacing)) {
    const auto label = truth.label_at(package.ego_id, package.frames[i].frame);
    if (!label) continue;
    set.features.push_back(extract_features(package, i, road, features));
    set.labels.push_back(*label);
  }
}

MotionModel fit_motion_model(const TrainingSet& set, const FeatureConfig& features,
                             const SvmHyperparams& hyper, TrainingDiagnostics* diagnostics) {
  MotionModel model;
  model.features = features;
  model.hyper = hyper;
  model.standardizer = Standardizer::fit(set.features);
  std::vector<FeatureVector> z;
  z.reserve(set.features.size());
  for (const FeatureVector& x : set.features) z.push_back(model.standardizer.apply(x));
  model.svm = train_classifier(z, set.labels, hyper, diagnostics);
  return model;
}

SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  // Fisher-Yates with raw engine draws so the order does not depend on the
  // standard library's distribution implementation.
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  std::size_t cut = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(n)));
  if (n >= 2) cut = std::clamp<std::size_t>(cut, 1, n - 1);
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(cut, n)));
  out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(std::min(cut, n)), order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  return out;
}

}  // namespace levelk
