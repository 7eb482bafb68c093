#include "levelk/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "levelk/error.hpp"
#include "levelk/serialization.hpp"

namespace levelk {

void EvalConfig::validate() const {
  if (!(window_s > 0.0)) throw ConfigError("evaluation window must be positive");
  if (!(curve_before >= 0.0) || !(curve_after >= 0.0)) {
    throw ConfigError("lead-time curve bounds must be non-negative");
  }
  if (!(curve_step > 0.0)) throw ConfigError("lead-time curve step must be positive");
  if (!(confidence_fraction > 0.0 && confidence_fraction <= 1.0)) {
    throw ConfigError("confidence fraction must lie in (0, 1]");
  }
}

const char* to_string(Predictor p) {
  switch (p) {
    case Predictor::kMotion: return "motion";
    case Predictor::kInteraction: return "interaction";
    case Predictor::kFused: return "fused";
  }
  return "?";
}

const ProbabilityVector* PredictionRecord::probabilities(Predictor p) const {
  switch (p) {
    case Predictor::kMotion: return motion ? &*motion : nullptr;
    case Predictor::kInteraction: return &interaction;
    case Predictor::kFused: return &fused;
  }
  return nullptr;
}

PredictionRecord make_record(const FramePrediction& prediction) {
  return {"",          prediction.ego,   prediction.frame,   prediction.t,
          prediction.interaction, prediction.motion, prediction.fused, prediction.beliefs};
}

namespace {

Json probs_json(const ProbabilityVector& p) {
  return {{"maneuver", kAllManeuvers[argmax(p)]}, {"p", p}};
}

ProbabilityVector probs_from(const Json& j) {
  ProbabilityVector p{};
  const Json& arr = j.at("p");
  if (!arr.is_array() || arr.size() != kNumManeuvers) {
    throw SchemaError("probability vector must have five entries");
  }
  for (std::size_t i = 0; i < kNumManeuvers; ++i) p[i] = arr[i].get<double>();
  return p;
}

}  // namespace

Json record_to_json(const PredictionRecord& r) {
  Json j{{"source", r.source},
         {"ego", r.ego},
         {"frame", r.frame},
         {"t", r.t},
         {"interaction", probs_json(r.interaction)},
         {"fused", probs_json(r.fused)},
         {"beliefs", beliefs_to_json(r.beliefs)}};
  j["motion"] = r.motion ? probs_json(*r.motion) : Json(nullptr);
  return j;
}

PredictionRecord record_from_json(const Json& j) {
  try {
    PredictionRecord r;
    read_optional(j, "source", r.source);
    r.ego = j.at("ego").get<VehicleId>();
    r.frame = j.at("frame").get<long>();
    r.t = j.at("t").get<double>();
    r.interaction = probs_from(j.at("interaction"));
    r.fused = probs_from(j.at("fused"));
    if (j.contains("motion") && !j.at("motion").is_null()) r.motion = probs_from(j.at("motion"));
    if (j.contains("beliefs")) r.beliefs = beliefs_from_json(j.at("beliefs"));
    return r;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("malformed prediction record: ") + e.what());
  }
}

void write_records(const std::vector<PredictionRecord>& records, std::ostream& out) {
  for (const PredictionRecord& r : records) out << record_to_json(r).dump() << '\n';
}

std::vector<PredictionRecord> read_records(std::istream& in) {
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw SchemaError(fmt::format("prediction line {}: {}", line_no, e.what()));
    }
    out.push_back(record_from_json(j));
  }
  return out;
}

std::optional<FrameTruth> frame_truth(const GroundTruth& truth, VehicleId id, long frame,
                                      double window_s) {
  const std::optional<ManeuverType> now = truth.label_at(id, frame);
  if (!now) return std::nullopt;
  FrameTruth out;
  out.active = *now;
  out.acceptable[index_of(*now)] = true;
  const long span = std::lround(window_s / truth.dt);
  for (long f = frame + 1; f <= frame + span; ++f) {
    const std::optional<ManeuverType> m = truth.label_at(id, f);
    if (!m) break;
    out.acceptable[index_of(*m)] = true;
  }
  return out;
}

namespace {

using Key = std::pair<std::string, VehicleId>;

struct Onset {
  Key key;
  long frame;
  ManeuverType type;
};

// Frames where a non-NoAction maneuver begins.
std::vector<Onset> find_onsets(const TruthSet& truths, const std::vector<Key>& keys) {
  std::vector<Onset> out;
  for (const Key& key : keys) {
    auto src = truths.find(key.first);
    if (src == truths.end()) continue;
    auto it = src->second.tracks.find(key.second);
    if (it == src->second.tracks.end()) continue;
    const LabelTrack& track = it->second;
    for (std::size_t i = 1; i < track.labels.size(); ++i) {
      const ManeuverType m = track.labels[i];
      if (m != ManeuverType::kNoAction && m != track.labels[i - 1]) {
        out.push_back({key, track.first_frame + static_cast<long>(i), m});
      }
    }
  }
  return out;
}

using RecordIndex = std::map<Key, std::map<long, const PredictionRecord*>>;

// Record nearest to `frame` within `tolerance` frames, ties to the earlier one.
const PredictionRecord* nearest(const RecordIndex& index, const Key& key, long frame,
                                long tolerance) {
  auto e = index.find(key);
  if (e == index.end()) return nullptr;
  const auto& frames = e->second;
  const PredictionRecord* best = nullptr;
  long best_gap = tolerance + 1;
  auto it = frames.lower_bound(frame - tolerance);
  for (; it != frames.end() && it->first <= frame + tolerance; ++it) {
    const long gap = std::abs(it->first - frame);
    if (gap < best_gap) {
      best_gap = gap;
      best = it->second;
    }
  }
  return best;
}

PredictorReport assess(Predictor predictor, const std::vector<PredictionRecord>& records,
                       const std::vector<FrameTruth>& truths, const std::vector<Onset>& onsets,
                       const RecordIndex& index, double dt, const EvalConfig& config) {
  PredictorReport rep;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const ProbabilityVector* p = records[i].probabilities(predictor);
    const std::size_t predicted = argmax(*p);
    const bool hit = truths[i].acceptable[predicted];
    const std::size_t truth = hit ? predicted : index_of(truths[i].active);
    ++rep.confusion[truth][predicted];
    ++rep.class_counts[truth];
    if (hit) ++correct;
  }
  rep.frames = records.size();
  rep.accuracy = records.empty() ? 0.0 : static_cast<double>(correct) / records.size();
  for (std::size_t c = 0; c < kNumManeuvers; ++c) {
    std::size_t predicted = 0;
    for (std::size_t r = 0; r < kNumManeuvers; ++r) predicted += rep.confusion[r][c];
    if (predicted > 0) rep.precision[c] = static_cast<double>(rep.confusion[c][c]) / predicted;
    if (rep.class_counts[c] > 0) {
      rep.recall[c] = static_cast<double>(rep.confusion[c][c]) / rep.class_counts[c];
    }
  }

  const long lo = -std::lround(config.curve_after / config.curve_step);
  const long hi = std::lround(config.curve_before / config.curve_step);
  const long tolerance = std::max<long>(0, std::lround(0.5 * config.curve_step / dt));
  rep.onsets = onsets.size();
  std::size_t zero_at = 0;
  for (long s = lo; s <= hi; ++s) {
    CurvePoint pt;
    pt.lead = s * config.curve_step;
    const long shift = std::lround(pt.lead / dt);
    double hits = 0.0;
    double conf = 0.0;
    for (const Onset& o : onsets) {
      const PredictionRecord* r = nearest(index, o.key, o.frame - shift, tolerance);
      if (!r) continue;
      const ProbabilityVector* p = r->probabilities(predictor);
      ++pt.samples;
      conf += (*p)[index_of(o.type)];
      if (argmax(*p) == index_of(o.type)) hits += 1.0;
    }
    if (pt.samples > 0) {
      pt.accuracy = hits / pt.samples;
      pt.confidence = conf / pt.samples;
    }
    if (s == 0) zero_at = rep.curve.size();
    rep.curve.push_back(pt);
  }
  if (!rep.curve.empty() && hi >= 0 && lo <= 0) {
    rep.final_confidence = rep.curve[zero_at].confidence;
    const double threshold = config.confidence_fraction * rep.final_confidence;
    for (std::size_t k = zero_at; k < rep.curve.size(); ++k) {
      const CurvePoint& pt = rep.curve[k];
      if (pt.samples == 0 || pt.confidence < threshold) break;
      rep.confidence_lead = pt.lead;
    }
  }
  return rep;
}

}  // namespace

const PredictorReport* EvalReport::get(Predictor p) const {
  switch (p) {
    case Predictor::kMotion: return motion ? &*motion : nullptr;
    case Predictor::kInteraction: return &interaction;
    case Predictor::kFused: return &fused;
  }
  return nullptr;
}

EvalReport evaluate_predictions(const std::vector<PredictionRecord>& records,
                                const TruthSet& truths, const EvalConfig& config) {
  config.validate();
  double dt = 0.0;
  for (const auto& [name, truth] : truths) {
    if (!(truth.dt > 0.0)) throw SchemaError("ground truth dt must be positive");
    if (dt != 0.0 && std::abs(dt - truth.dt) > 1e-12) {
      throw SchemaError("ground truth datasets disagree on the frame interval");
    }
    dt = truth.dt;
  }

  std::vector<FrameTruth> labels;
  labels.reserve(records.size());
  std::vector<std::string> missing;
  for (const PredictionRecord& r : records) {
    auto src = truths.find(r.source);
    const std::optional<FrameTruth> m =
        src == truths.end() ? std::nullopt
                            : frame_truth(src->second, r.ego, r.frame, config.window_s);
    if (!m) {
      missing.push_back(r.source.empty() ? fmt::format("{}:{}", r.ego, r.frame)
                                         : fmt::format("{}/{}:{}", r.source, r.ego, r.frame));
      continue;
    }
    labels.push_back(*m);
  }
  if (!missing.empty()) {
    std::string msg = "predictions without ground truth (ego:frame):";
    for (const std::string& s : missing) msg += " " + s;
    throw ContractViolation(msg);
  }

  const bool have_motion =
      !records.empty() &&
      std::all_of(records.begin(), records.end(), [](const auto& r) { return r.motion.has_value(); });

  RecordIndex index;
  for (const PredictionRecord& r : records) index[{r.source, r.ego}][r.frame] = &r;
  std::vector<Key> keys;
  for (const auto& [key, frames] : index) keys.push_back(key);
  const std::vector<Onset> onsets = find_onsets(truths, keys);

  EvalReport rep;
  rep.config = config;
  rep.frames = records.size();
  if (have_motion) {
    rep.motion = assess(Predictor::kMotion, records, labels, onsets, index, dt, config);
  }
  rep.interaction = assess(Predictor::kInteraction, records, labels, onsets, index, dt, config);
  rep.fused = assess(Predictor::kFused, records, labels, onsets, index, dt, config);
  return rep;
}

EvalReport evaluate_predictions(const std::vector<PredictionRecord>& records,
                                const GroundTruth& truth, const EvalConfig& config) {
  return evaluate_predictions(records, TruthSet{{"", truth}}, config);
}

namespace {

Json predictor_json(const PredictorReport& r) {
  Json classes = Json::object();
  for (ManeuverType m : kAllManeuvers) {
    const std::size_t i = index_of(m);
    classes[std::string(to_string(m))] = {
        {"count", r.class_counts[i]},
        {"precision", r.precision[i] ? Json(*r.precision[i]) : Json(nullptr)},
        {"recall", r.recall[i] ? Json(*r.recall[i]) : Json(nullptr)}};
  }
  Json curve = Json::array();
  for (const CurvePoint& p : r.curve) {
    curve.push_back({{"lead", p.lead},
                     {"samples", p.samples},
                     {"accuracy", p.accuracy},
                     {"confidence", p.confidence}});
  }
  return {{"frames", r.frames},       {"accuracy", r.accuracy},
          {"confusion", r.confusion}, {"classes", classes},
          {"onsets", r.onsets},       {"final_confidence", r.final_confidence},
          {"confidence_lead", r.confidence_lead}, {"curve", curve}};
}

}  // namespace

Json report_to_json(const EvalReport& report) {
  Json predictors = Json::object();
  for (Predictor p : kAllPredictors) {
    if (const PredictorReport* r = report.get(p)) predictors[to_string(p)] = predictor_json(*r);
  }
  const EvalConfig& c = report.config;
  return {{"frames", report.frames},
          {"config",
           {{"window_s", c.window_s},
            {"curve_before", c.curve_before},
            {"curve_after", c.curve_after},
            {"curve_step", c.curve_step},
            {"confidence_fraction", c.confidence_fraction}}},
          {"order", kAllManeuvers},
          {"predictors", predictors}};
}

std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  out << fmt::format("frames evaluated: {}\n\n", report.frames);
  out << fmt::format("{:<12} {:>9} {:>12} {:>10}\n", "predictor", "accuracy", "final conf",
                     "lead (s)");
  for (Predictor p : kAllPredictors) {
    const PredictorReport* r = report.get(p);
    if (!r) continue;
    out << fmt::format("{:<12} {:>9.4f} {:>12.4f} {:>10.2f}\n", to_string(p), r->accuracy,
                       r->final_confidence, r->confidence_lead);
  }
  for (Predictor p : kAllPredictors) {
    const PredictorReport* r = report.get(p);
    if (!r) continue;
    out << fmt::format("\n[{}]\n{:<16} {:>7} {:>10} {:>8}\n", to_string(p), "maneuver", "count",
                       "precision", "recall");
    for (ManeuverType m : kAllManeuvers) {
      const std::size_t i = index_of(m);
      auto cell = [](const std::optional<double>& v) {
        return v ? fmt::format("{:.4f}", *v) : std::string("-");
      };
      out << fmt::format("{:<16} {:>7} {:>10} {:>8}\n", to_string(m), r->class_counts[i],
                         cell(r->precision[i]), cell(r->recall[i]));
    }
    out << "confusion (rows truth, columns predicted):\n";
    for (std::size_t t = 0; t < kNumManeuvers; ++t) {
      out << fmt::format("{:<16}", to_string(kAllManeuvers[t]));
      for (std::size_t c = 0; c < kNumManeuvers; ++c) out << fmt::format(" {:>6}", r->confusion[t][c]);
      out << '\n';
    }
  }
  return out.str();
}

std::string horizon_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "predictor,lead_s,samples,accuracy,confidence\n";
  for (Predictor p : kAllPredictors) {
    const PredictorReport* r = report.get(p);
    if (!r) continue;
    for (const CurvePoint& pt : r->curve) {
      out << fmt::format("{},{:.3f},{},{:.6f},{:.6f}\n", to_string(p), pt.lead, pt.samples,
                         pt.accuracy, pt.confidence);
    }
  }
  return out.str();
}

}  // namespace levelk
