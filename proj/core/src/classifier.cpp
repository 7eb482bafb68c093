#include "levelk/classifier.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "levelk/error.hpp"
#include "levelk/serialization.hpp"

namespace levelk {

void FeatureConfig::validate() const {
  if (history < 1) throw ConfigError("feature history must be at least one frame");
  if (!(history_spacing > 0.0)) throw ConfigError("history spacing must be positive");
  if (neighbor_cap < 0) throw ConfigError("neighbour cap must be non-negative");
}

FeatureVector extract_features(const EgoPackage& package, std::size_t frame_index,
                               const RoadGeometry& road, const FeatureConfig& config) {
  if (frame_index >= package.frames.size()) throw InvalidArgument("frame index out of range");
  const long stride = std::max(1L, std::lround(config.history_spacing / package.dt));
  FeatureVector out;
  out.reserve(static_cast<std::size_t>(config.dimension()));
  for (int h = config.history - 1; h >= 0; --h) {
    const long idx = std::max(0L, static_cast<long>(frame_index) - h * stride);
    const EgoFrame& f = package.frames[static_cast<std::size_t>(idx)];
    out.push_back(f.ego.y - road.lane_center(f.ego.lane));
    out.push_back(f.ego.vy);
    out.push_back(f.ego.vx);
    for (int k = 0; k < config.neighbor_cap; ++k) {
      if (static_cast<std::size_t>(k) < f.neighbors.size()) {
        const VehicleState& n = f.neighbors[static_cast<std::size_t>(k)];
        out.insert(out.end(), {n.x - f.ego.x, n.y - f.ego.y, n.vx - f.ego.vx, n.vy - f.ego.vy, 1.0});
      } else {
        out.insert(out.end(), {0.0, 0.0, 0.0, 0.0, 0.0});
      }
    }
  }
  return out;
}

Standardizer::Standardizer(std::size_t input_dim, std::vector<std::size_t> kept,
                           std::vector<double> mean, std::vector<double> stddev)
    : input_dim_(input_dim), kept_(std::move(kept)), mean_(std::move(mean)), stddev_(std::move(stddev)) {
  if (kept_.size() != mean_.size() || kept_.size() != stddev_.size()) {
    throw InvalidArgument("standardizer vectors differ in length");
  }
  for (std::size_t i = 0; i < kept_.size(); ++i) {
    if (kept_[i] >= input_dim_) throw InvalidArgument("kept dimension out of range");
    if (!(stddev_[i] > 0.0)) throw InvalidArgument("standardizer needs positive deviations");
  }
}

Standardizer Standardizer::fit(std::span<const FeatureVector> samples) {
  if (samples.size() < 2) throw InvalidArgument("standardizer needs at least two samples");
  const std::size_t dim = samples.front().size();
  const double n = static_cast<double>(samples.size());
  std::vector<double> mean(dim, 0.0);
  for (const FeatureVector& s : samples) {
    if (s.size() != dim) throw InvalidArgument("training features differ in dimension");
    for (std::size_t d = 0; d < dim; ++d) mean[d] += s[d];
  }
  for (double& m : mean) m /= n;
  std::vector<double> var(dim, 0.0);
  for (const FeatureVector& s : samples) {
    for (std::size_t d = 0; d < dim; ++d) var[d] += (s[d] - mean[d]) * (s[d] - mean[d]);
  }
  std::vector<std::size_t> kept;
  std::vector<double> kept_mean, kept_std;
  for (std::size_t d = 0; d < dim; ++d) {
    const double sd = std::sqrt(var[d] / n);
    // Relative cut so rounding noise on a constant column does not survive.
    if (sd > 1e-12 * std::max(1.0, std::abs(mean[d]))) {
      kept.push_back(d);
      kept_mean.push_back(mean[d]);
      kept_std.push_back(sd);
    }
  }
  return Standardizer(dim, std::move(kept), std::move(kept_mean), std::move(kept_std));
}

FeatureVector Standardizer::apply(std::span<const double> x) const {
  if (x.size() != input_dim_) {
    throw InvalidArgument("feature vector has dimension " + std::to_string(x.size()) + ", expected " +
                          std::to_string(input_dim_));
  }
  FeatureVector z(kept_.size());
  for (std::size_t i = 0; i < kept_.size(); ++i) z[i] = (x[kept_[i]] - mean_[i]) / stddev_[i];
  return z;
}

FeatureVector Standardizer::invert(std::span<const double> z) const {
  if (z.size() != kept_.size()) throw InvalidArgument("standardized vector has wrong dimension");
  FeatureVector x(input_dim_, 0.0);
  for (std::size_t i = 0; i < kept_.size(); ++i) x[kept_[i]] = z[i] * stddev_[i] + mean_[i];
  return x;
}

std::vector<std::size_t> Standardizer::dropped() const {
  std::vector<std::size_t> out;
  std::size_t k = 0;
  for (std::size_t d = 0; d < input_dim_; ++d) {
    if (k < kept_.size() && kept_[k] == d) ++k;
    else out.push_back(d);
  }
  return out;
}

std::array<double, kNumManeuvers> LinearSvm::margins(std::span<const double> z) const {
  std::array<double, kNumManeuvers> out{};
  for (std::size_t c = 0; c < kNumManeuvers; ++c) {
    double acc = biases[c];
    for (std::size_t d = 0; d < z.size(); ++d) acc += weights[c][d] * z[d];
    out[c] = acc;
  }
  return out;
}

LinearSvm train_classifier(std::span<const FeatureVector> standardized,
                           std::span<const ManeuverType> labels, const SvmHyperparams& hyper,
                           TrainingDiagnostics* diagnostics) {
  if (standardized.size() != labels.size()) throw InvalidArgument("features and labels differ in count");
  if (standardized.empty()) throw InvalidArgument("no training samples");
  if (!(hyper.c > 0.0) || hyper.max_epochs < 1) throw InvalidArgument("invalid SVM hyperparameters");
  std::array<std::size_t, kNumManeuvers> counts{};
  for (ManeuverType l : labels) ++counts[index_of(l)];
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2) {
    throw InvalidArgument("training data must contain at least two classes");
  }

  const Eigen::Index n = static_cast<Eigen::Index>(standardized.size());
  const Eigen::Index d = static_cast<Eigen::Index>(standardized.front().size());
  // Constant column of ones carries the bias and is not regularized.
  Eigen::MatrixXd z(n, d + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const FeatureVector& row = standardized[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != d) throw InvalidArgument("features differ in dimension");
    for (Eigen::Index k = 0; k < d; ++k) z(i, k) = row[static_cast<std::size_t>(k)];
    z(i, d) = 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double reg = inv_n / hyper.c;

  Eigen::MatrixXd y(n, static_cast<Eigen::Index>(kNumManeuvers));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < kNumManeuvers; ++c) {
      y(i, static_cast<Eigen::Index>(c)) = index_of(labels[static_cast<std::size_t>(i)]) == c ? 1.0 : -1.0;
    }
  }

  auto objective = [&](const Eigen::VectorXd& w, const Eigen::VectorXd& margin, Eigen::Index c) {
    const double slack = (1.0 - (y.col(c).array() * margin.array())).max(0.0).square().sum();
    return 0.5 * reg * w.head(d).squaredNorm() + inv_n * slack;
  };

  LinearSvm model;
  TrainingDiagnostics diag;
  diag.class_counts = counts;
  for (std::size_t cls = 0; cls < kNumManeuvers; ++cls) {
    const Eigen::Index c = static_cast<Eigen::Index>(cls);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
    Eigen::VectorXd margin = Eigen::VectorXd::Zero(n);
    double j = objective(w, margin, c);
    double step = 1.0;
    diag.loss_history[cls].push_back(j);
    for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
      const Eigen::ArrayXd slack = (1.0 - (y.col(c).array() * margin.array())).max(0.0);
      const Eigen::VectorXd r = (-2.0 * inv_n) * (y.col(c).array() * slack).matrix();
      Eigen::VectorXd grad = z.transpose() * r;
      grad.head(d) += reg * w.head(d);
      const double g2 = grad.squaredNorm();
      if (g2 == 0.0) break;
      const Eigen::VectorXd zg = z * grad;
      step *= 2.0;
      double next_j = j;
      for (int tries = 0; tries < 60; ++tries) {
        const Eigen::VectorXd w_try = w - step * grad;
        const Eigen::VectorXd m_try = margin - step * zg;
        next_j = objective(w_try, m_try, c);
        if (next_j <= j - 0.5 * step * g2) {
          w = w_try;
          margin = m_try;
          break;
        }
        step *= 0.5;
        next_j = j;
      }
      const double change = j - next_j;
      j = next_j;
      diag.loss_history[cls].push_back(j);
      if (change <= hyper.tolerance * std::max(1.0, std::abs(j))) break;
    }
    model.weights[cls].assign(w.data(), w.data() + d);
    model.biases[cls] = w(d);
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < standardized.size(); ++i) {
    const auto m = model.margins(standardized[i]);
    const auto best = static_cast<std::size_t>(std::max_element(m.begin(), m.end()) - m.begin());
    if (best == index_of(labels[i])) ++correct;
  }
  diag.training_accuracy = static_cast<double>(correct) / static_cast<double>(standardized.size());
  if (diagnostics) *diagnostics = std::move(diag);
  return model;
}

ProbabilityVector softmax(std::span<const double> scores, double temperature) {
  if (scores.size() != kNumManeuvers) throw InvalidArgument("softmax expects one score per maneuver");
  const double top = *std::max_element(scores.begin(), scores.end());
  ProbabilityVector p{};
  double sum = 0.0;
  for (std::size_t c = 0; c < kNumManeuvers; ++c) {
    p[c] = std::exp((scores[c] - top) / temperature);
    sum += p[c];
  }
  for (double& v : p) v /= sum;
  return p;
}

ProbabilityVector MotionModel::predict_proba(std::span<const double> raw_features) const {
  const FeatureVector z = standardizer.apply(raw_features);
  const auto m = svm.margins(z);
  return softmax(m);
}

ManeuverType MotionModel::predict(std::span<const double> raw_features) const {
  return kAllManeuvers[argmax(predict_proba(raw_features))];
}

std::size_t argmax(const ProbabilityVector& p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

nlohmann::json model_to_json(const MotionModel& model) {
  Json weights = Json::array();
  for (const auto& w : model.svm.weights) weights.push_back(w);
  std::vector<std::string> classes;
  for (ManeuverType m : kAllManeuvers) classes.emplace_back(to_string(m));
  return Json{{"schema_version", kFeatureSchemaVersion},
              {"features",
               {{"history", model.features.history},
                {"history_spacing", model.features.history_spacing},
                {"neighbor_cap", model.features.neighbor_cap}}},
              {"standardizer",
               {{"input_dim", model.standardizer.input_dim()},
                {"kept", model.standardizer.kept()},
                {"mean", model.standardizer.mean()},
                {"std", model.standardizer.stddev()}}},
              {"classes", classes},
              {"weights", std::move(weights)},
              {"biases", model.svm.biases},
              {"hyperparams",
               {{"c", model.hyper.c},
                {"max_epochs", model.hyper.max_epochs},
                {"tolerance", model.hyper.tolerance}}}};
}

MotionModel model_from_json(const nlohmann::json& j) {
  MotionModel model;
  try {
    if (j.at("schema_version").get<int>() != kFeatureSchemaVersion) {
      throw SchemaError("unsupported model schema version");
    }
    const Json& f = j.at("features");
    model.features.history = f.at("history").get<int>();
    model.features.history_spacing = f.at("history_spacing").get<double>();
    model.features.neighbor_cap = f.at("neighbor_cap").get<int>();
    const Json& s = j.at("standardizer");
    model.standardizer = Standardizer(s.at("input_dim").get<std::size_t>(),
                                      s.at("kept").get<std::vector<std::size_t>>(),
                                      s.at("mean").get<std::vector<double>>(),
                                      s.at("std").get<std::vector<double>>());
    const Json& w = j.at("weights");
    if (w.size() != kNumManeuvers) throw SchemaError("model needs one weight vector per maneuver");
    for (std::size_t c = 0; c < kNumManeuvers; ++c) {
      model.svm.weights[c] = w[c].get<std::vector<double>>();
      if (model.svm.weights[c].size() != model.standardizer.output_dim()) {
        throw SchemaError("weight vector dimension does not match the standardizer");
      }
    }
    model.svm.biases = j.at("biases").get<std::array<double, kNumManeuvers>>();
    if (auto h = j.find("hyperparams"); h != j.end()) {
      read_optional(*h, "c", model.hyper.c);
      read_optional(*h, "max_epochs", model.hyper.max_epochs);
      read_optional(*h, "tolerance", model.hyper.tolerance);
    }
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("malformed model: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw SchemaError(std::string("malformed model: ") + e.what());
  }
  if (static_cast<std::size_t>(model.features.dimension()) != model.standardizer.input_dim()) {
    throw SchemaError("feature schema does not match the standardizer input dimension");
  }
  return model;
}

ProbabilityVector interaction_prior(
    const std::array<std::optional<double>, kNumManeuvers>& values, double temperature) {
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& v : values) {
    if (v) top = std::max(top, *v);
  }
  ProbabilityVector p{};
  if (!std::isfinite(top)) return p;
  double sum = 0.0;
  for (std::size_t c = 0; c < kNumManeuvers; ++c) {
    if (values[c]) {
      p[c] = std::exp((*values[c] - top) / temperature);
      sum += p[c];
    }
  }
  for (double& v : p) v /= sum;
  return p;
}

ProbabilityVector fuse(const ProbabilityVector& motion, const ProbabilityVector& prior) {
  auto total = [](const ProbabilityVector& p) { return p[0] + p[1] + p[2] + p[3] + p[4]; };
  const double prior_sum = total(prior);
  if (total(motion) <= 0.0 && prior_sum <= 0.0) {
    throw InvalidArgument("cannot fuse two all-zero distributions");
  }
  ProbabilityVector fused{};
  for (std::size_t c = 0; c < kNumManeuvers; ++c) fused[c] = motion[c] * prior[c];
  const double sum = total(fused);
  if (sum <= 0.0) {
    if (prior_sum <= 0.0) return motion;
    for (std::size_t c = 0; c < kNumManeuvers; ++c) fused[c] = prior[c] / prior_sum;
    return fused;
  }
  for (double& v : fused) v /= sum;
  return fused;
}

}  // namespace levelk
