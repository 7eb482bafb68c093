#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "levelk/classifier.hpp"
#include "levelk/pipeline.hpp"
#include "levelk/tracker.hpp"

namespace levelk {

struct EvalConfig {
  double window_s = 5.0;       // look-ahead that defines the next maneuver
  double curve_before = 5.0;   // lead-time curve spans [-curve_after, curve_before] s
  double curve_after = 1.0;
  double curve_step = 0.1;
  double confidence_fraction = 0.6;

  void validate() const;
};

enum class Predictor { kMotion, kInteraction, kFused };
inline constexpr std::array<Predictor, 3> kAllPredictors = {Predictor::kMotion,
                                                            Predictor::kInteraction,
                                                            Predictor::kFused};
const char* to_string(Predictor p);

/// The serialisable part of a FramePrediction.
struct PredictionRecord {
  std::string source;  // dataset the package came from; empty for a single dataset
  VehicleId ego = 0;
  long frame = 0;
  double t = 0.0;
  ProbabilityVector interaction{};
  std::optional<ProbabilityVector> motion;
  ProbabilityVector fused{};
  BeliefMap beliefs;

  const ProbabilityVector* probabilities(Predictor p) const;
};

PredictionRecord make_record(const FramePrediction& prediction);
nlohmann::json record_to_json(const PredictionRecord& record);
PredictionRecord record_from_json(const nlohmann::json& j);

/// One JSON object per line.
void write_records(const std::vector<PredictionRecord>& records, std::ostream& out);
std::vector<PredictionRecord> read_records(std::istream& in);

/// What counts as correct at one frame: the maneuver active at the frame or
/// any maneuver that is active at some point within the following window.
struct FrameTruth {
  ManeuverType active = ManeuverType::kNoAction;
  std::array<bool, kNumManeuvers> acceptable{};
};

/// Empty when the frame has no label.
std::optional<FrameTruth> frame_truth(const GroundTruth& truth, VehicleId id, long frame,
                                      double window_s);

struct CurvePoint {
  double lead = 0.0;        // s before onset (negative after)
  std::size_t samples = 0;
  double accuracy = 0.0;
  double confidence = 0.0;  // mean probability of the upcoming maneuver
};

struct PredictorReport {
  std::size_t frames = 0;
  double accuracy = 0.0;
  /// [truth][predicted]; the truth of a correct frame is the predicted
  /// maneuver, otherwise the active one.
  std::array<std::array<std::size_t, kNumManeuvers>, kNumManeuvers> confusion{};
  std::array<std::size_t, kNumManeuvers> class_counts{};
  std::array<std::optional<double>, kNumManeuvers> precision;  // empty when never predicted
  std::array<std::optional<double>, kNumManeuvers> recall;     // empty when class absent
  std::vector<CurvePoint> curve;
  std::size_t onsets = 0;
  double final_confidence = 0.0;  // curve confidence at onset
  /// Earliest lead such that the confidence stays at or above
  /// confidence_fraction * final_confidence for every lead from onset up to it.
  double confidence_lead = 0.0;
};

struct EvalReport {
  EvalConfig config;
  std::size_t frames = 0;
  std::optional<PredictorReport> motion;
  PredictorReport interaction;
  PredictorReport fused;

  const PredictorReport* get(Predictor p) const;
};

/// Ground truth per dataset, keyed like PredictionRecord::source.
using TruthSet = std::map<std::string, GroundTruth>;

/// Throws ContractViolation listing every (ego, frame) without a label.
EvalReport evaluate_predictions(const std::vector<PredictionRecord>& records,
                                const TruthSet& truths, const EvalConfig& config = {});
EvalReport evaluate_predictions(const std::vector<PredictionRecord>& records,
                                const GroundTruth& truth, const EvalConfig& config = {});

nlohmann::json report_to_json(const EvalReport& report);
std::string report_table(const EvalReport& report);
/// predictor,lead_s,samples,accuracy,confidence
std::string horizon_csv(const EvalReport& report);

}  // namespace levelk
