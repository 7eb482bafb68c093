#include "levelk/config.hpp"

#include <initializer_list>
#include <string>

#include "levelk/error.hpp"
#include "levelk/serialization.hpp"

namespace levelk {

void AppConfig::validate() const {
  try {
    solver.validate();
    weights.validate();
    car_following.validate();
    belief.validate();
    pipeline.validate();
    features.validate();
    evaluation.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!(fusion_temperature > 0.0)) throw ConfigError("fusion temperature must be positive");
  if (!(svm.c > 0.0) || svm.max_epochs < 1 || !(svm.tolerance >= 0.0)) {
    throw ConfigError("svm hyperparameters out of range");
  }
  if (!(train_split > 0.0 && train_split < 1.0)) throw ConfigError("train_split must lie in (0, 1)");
  if (train_frame_spacing < 1) throw ConfigError("train_frame_spacing must be at least 1");
  if (predict_stride < 1) throw ConfigError("predict_stride must be at least 1");
  if (episodes < 1) throw ConfigError("episodes must be at least 1");
}

namespace {

void check_keys(const Json& j, const char* section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(section) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown configuration key " + std::string(section) + "." + key);
  }
}

const Json* section(const Json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

}  // namespace

AppConfig config_from_json(const Json& j) {
  AppConfig c;
  try {
    check_keys(j, "config",
               {"seed", "solver", "maneuver", "car_following", "weights", "belief", "fusion",
                "pipeline", "features", "svm", "training", "prediction", "evaluation", "generate"});
    read_optional(j, "seed", c.seed);
    if (const Json* s = section(j, "solver")) {
      check_keys(*s, "solver", {"max_sequence_depth", "horizon_steps", "dt", "gamma"});
      read_optional(*s, "max_sequence_depth", c.solver.max_sequence_depth);
      read_optional(*s, "horizon_steps", c.solver.horizon.steps);
      read_optional(*s, "dt", c.solver.horizon.dt);
      read_optional(*s, "gamma", c.solver.horizon.gamma);
    }
    if (const Json* s = section(j, "maneuver")) {
      check_keys(*s, "maneuver",
                 {"accel_rate", "decel_rate", "lane_change_duration", "accel_duration", "vmax",
                  "vmin"});
      s->get_to(c.solver.maneuver);
    }
    if (const Json* s = section(j, "car_following")) {
      check_keys(*s, "car_following", {"c1", "c2", "cd", "cp"});
      read_optional(*s, "c1", c.car_following.c1);
      read_optional(*s, "c2", c.car_following.c2);
      read_optional(*s, "cd", c.car_following.cd);
      read_optional(*s, "cp", c.car_following.cp);
    }
    if (const Json* s = section(j, "weights")) {
      check_keys(*s, "weights", {"collision", "safety", "road", "objective"});
      read_optional(*s, "collision", c.weights.collision);
      read_optional(*s, "safety", c.weights.safety);
      read_optional(*s, "road", c.weights.road);
      read_optional(*s, "objective", c.weights.objective);
    }
    if (const Json* s = section(j, "belief")) {
      check_keys(*s, "belief", {"delta", "position_weight", "velocity_weight", "initial"});
      read_optional(*s, "delta", c.belief.delta);
      read_optional(*s, "position_weight", c.belief.weights.position);
      read_optional(*s, "velocity_weight", c.belief.weights.velocity);
      read_optional(*s, "initial", c.belief.initial);
    }
    if (const Json* s = section(j, "fusion")) {
      check_keys(*s, "fusion", {"temperature"});
      read_optional(*s, "temperature", c.fusion_temperature);
    }
    if (const Json* s = section(j, "pipeline")) {
      check_keys(*s, "pipeline",
                 {"columns", "road", "frame_dt", "sg_window", "sg_polyorder",
                  "window_longitudinal", "window_lateral", "lateral_from_left", "label_context",
                  "accel_threshold"});
      PipelineConfig& p = c.pipeline;
      if (const Json* cols = section(*s, "columns")) {
        check_keys(*cols, "pipeline.columns",
                   {"vehicle_id", "frame_id", "local_x", "local_y", "velocity", "length", "width",
                    "lane_id", "acceleration"});
        read_optional(*cols, "vehicle_id", p.columns.vehicle_id);
        read_optional(*cols, "frame_id", p.columns.frame_id);
        read_optional(*cols, "local_x", p.columns.local_x);
        read_optional(*cols, "local_y", p.columns.local_y);
        read_optional(*cols, "velocity", p.columns.velocity);
        read_optional(*cols, "length", p.columns.length);
        read_optional(*cols, "width", p.columns.width);
        read_optional(*cols, "lane_id", p.columns.lane_id);
        read_optional(*cols, "acceleration", p.columns.acceleration);
      }
      read_optional(*s, "road", p.road);
      read_optional(*s, "frame_dt", p.frame_dt);
      read_optional(*s, "sg_window", p.sg_window);
      read_optional(*s, "sg_polyorder", p.sg_polyorder);
      read_optional(*s, "window_longitudinal", p.window_longitudinal);
      read_optional(*s, "window_lateral", p.window_lateral);
      read_optional(*s, "lateral_from_left", p.lateral_from_left);
      read_optional(*s, "label_context", p.label_context);
      read_optional(*s, "accel_threshold", p.accel_threshold);
    }
    if (const Json* s = section(j, "features")) {
      check_keys(*s, "features", {"history", "history_spacing", "neighbor_cap"});
      read_optional(*s, "history", c.features.history);
      read_optional(*s, "history_spacing", c.features.history_spacing);
      read_optional(*s, "neighbor_cap", c.features.neighbor_cap);
    }
    if (const Json* s = section(j, "svm")) {
      check_keys(*s, "svm", {"c", "max_epochs", "tolerance"});
      read_optional(*s, "c", c.svm.c);
      read_optional(*s, "max_epochs", c.svm.max_epochs);
      read_optional(*s, "tolerance", c.svm.tolerance);
    }
    if (const Json* s = section(j, "training")) {
      check_keys(*s, "training", {"split", "frame_spacing"});
      read_optional(*s, "split", c.train_split);
      read_optional(*s, "frame_spacing", c.train_frame_spacing);
    }
    if (const Json* s = section(j, "prediction")) {
      check_keys(*s, "prediction", {"stride"});
      read_optional(*s, "stride", c.predict_stride);
    }
    if (const Json* s = section(j, "evaluation")) {
      check_keys(*s, "evaluation",
                 {"window_s", "curve_before", "curve_after", "curve_step", "confidence_fraction"});
      read_optional(*s, "window_s", c.evaluation.window_s);
      read_optional(*s, "curve_before", c.evaluation.curve_before);
      read_optional(*s, "curve_after", c.evaluation.curve_after);
      read_optional(*s, "curve_step", c.evaluation.curve_step);
      read_optional(*s, "confidence_fraction", c.evaluation.confidence_fraction);
    }
    if (const Json* s = section(j, "generate")) {
      check_keys(*s, "generate", {"episodes", "scenario"});
      read_optional(*s, "episodes", c.episodes);
      if (const Json* sc = section(*s, "scenario")) c.scenario = scenario_from_json(*sc);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  } catch (const SchemaError& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

Json config_to_json(const AppConfig& c) {
  const PipelineConfig& p = c.pipeline;
  const ColumnMapping& cols = p.columns;
  return {
      {"seed", c.seed},
      {"solver",
       {{"max_sequence_depth", c.solver.max_sequence_depth},
        {"horizon_steps", c.solver.horizon.steps},
        {"dt", c.solver.horizon.dt},
        {"gamma", c.solver.horizon.gamma}}},
      {"maneuver", c.solver.maneuver},
      {"car_following",
       {{"c1", c.car_following.c1},
        {"c2", c.car_following.c2},
        {"cd", c.car_following.cd},
        {"cp", c.car_following.cp}}},
      {"weights",
       {{"collision", c.weights.collision},
        {"safety", c.weights.safety},
        {"road", c.weights.road},
        {"objective", c.weights.objective}}},
      {"belief",
       {{"delta", c.belief.delta},
        {"position_weight", c.belief.weights.position},
        {"velocity_weight", c.belief.weights.velocity},
        {"initial", c.belief.initial}}},
      {"fusion", {{"temperature", c.fusion_temperature}}},
      {"pipeline",
       {{"columns",
         {{"vehicle_id", cols.vehicle_id},
          {"frame_id", cols.frame_id},
          {"local_x", cols.local_x},
          {"local_y", cols.local_y},
          {"velocity", cols.velocity},
          {"length", cols.length},
          {"width", cols.width},
          {"lane_id", cols.lane_id},
          {"acceleration", cols.acceleration}}},
        {"road", p.road},
        {"frame_dt", p.frame_dt},
        {"sg_window", p.sg_window},
        {"sg_polyorder", p.sg_polyorder},
        {"window_longitudinal", p.window_longitudinal},
        {"window_lateral", p.window_lateral},
        {"lateral_from_left", p.lateral_from_left},
        {"label_context", p.label_context},
        {"accel_threshold", p.accel_threshold}}},
      {"features",
       {{"history", c.features.history},
        {"history_spacing", c.features.history_spacing},
        {"neighbor_cap", c.features.neighbor_cap}}},
      {"svm", {{"c", c.svm.c}, {"max_epochs", c.svm.max_epochs}, {"tolerance", c.svm.tolerance}}},
      {"training", {{"split", c.train_split}, {"frame_spacing", c.train_frame_spacing}}},
      {"prediction", {{"stride", c.predict_stride}}},
      {"evaluation",
       {{"window_s", c.evaluation.window_s},
        {"curve_before", c.evaluation.curve_before},
        {"curve_after", c.evaluation.curve_after},
        {"curve_step", c.evaluation.curve_step},
        {"confidence_fraction", c.evaluation.confidence_fraction}}},
      {"generate", {{"episodes", c.episodes}, {"scenario", scenario_to_json(c.scenario)}}},
  };
}

AppConfig load_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = read_json_file(path);
  } catch (const SchemaError& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(j);
}

}  // namespace levelk
