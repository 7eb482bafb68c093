#include "levelk/serialization.hpp"

#include <fstream>
#include <string>

#include "levelk/error.hpp"

namespace levelk {

void to_json(Json& j, ManeuverType m) { j = std::string(to_string(m)); }

void from_json(const Json& j, ManeuverType& m) {
  const auto parsed = parse_maneuver(j.get<std::string>());
  if (!parsed) throw SchemaError("unknown maneuver '" + j.get<std::string>() + "'");
  m = *parsed;
}

void to_json(Json& j, const RoadGeometry& road) {
  j = Json{{"num_lanes", road.num_lanes},
           {"lane_width", road.lane_width},
           {"road_length", road.road_length}};
}

void from_json(const Json& j, RoadGeometry& road) {
  read_optional(j, "num_lanes", road.num_lanes);
  read_optional(j, "lane_width", road.lane_width);
  read_optional(j, "road_length", road.road_length);
}

void to_json(Json& j, const VehicleState& s) {
  j = Json{{"id", s.id},   {"x", s.x},   {"y", s.y},           {"vx", s.vx},
           {"vy", s.vy},   {"ax", s.ax}, {"ay", s.ay},         {"length", s.length},
           {"width", s.width}, {"lane", s.lane}};
}

void from_json(const Json& j, VehicleState& s) {
  s.id = j.at("id").get<VehicleId>();
  s.x = j.at("x").get<double>();
  s.y = j.at("y").get<double>();
  s.vx = j.at("vx").get<double>();
  s.vy = j.at("vy").get<double>();
  read_optional(j, "ax", s.ax);
  read_optional(j, "ay", s.ay);
  read_optional(j, "length", s.length);
  read_optional(j, "width", s.width);
  s.lane = j.at("lane").get<int>();
}

void to_json(Json& j, const ManeuverParams& p) {
  j = Json{{"accel_rate", p.accel_rate},
           {"decel_rate", p.decel_rate},
           {"lane_change_duration", p.lane_change_duration},
           {"accel_duration", p.accel_duration},
           {"vmax", p.vmax},
           {"vmin", p.vmin}};
}

void from_json(const Json& j, ManeuverParams& p) {
  read_optional(j, "accel_rate", p.accel_rate);
  read_optional(j, "decel_rate", p.decel_rate);
  read_optional(j, "lane_change_duration", p.lane_change_duration);
  read_optional(j, "accel_duration", p.accel_duration);
  read_optional(j, "vmax", p.vmax);
  read_optional(j, "vmin", p.vmin);
}

void to_json(Json& j, const Policy& p) {
  Json maneuvers = Json::array();
  for (const ManeuverInstance& m : p.maneuvers) {
    maneuvers.push_back(Json{{"type", m.type}, {"start_time", m.start_time}});
  }
  j = Json{{"owner", p.owner}, {"level", p.level}, {"maneuvers", std::move(maneuvers)}};
}

void to_json(Json& j, const LevelBelief& b) {
  j = Json{{"p", b.p}, {"updates", b.updates}};
}

Json scene_to_json(const Scene& scene) {
  return Json{{"time", scene.time()},
              {"target_id", scene.target_id()},
              {"road", scene.road()},
              {"vehicles", scene.vehicles()}};
}

Scene scene_from_json(const Json& j) {
  try {
    return Scene(j.at("time").get<double>(), j.at("vehicles").get<std::vector<VehicleState>>(),
                 j.at("road").get<RoadGeometry>(), j.at("target_id").get<VehicleId>());
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("malformed scene: ") + e.what());
  }
}

Json beliefs_to_json(const BeliefMap& beliefs) {
  Json j = Json::object();
  for (const auto& [id, b] : beliefs) j[std::to_string(id)] = b;
  return j;
}

BeliefMap beliefs_from_json(const Json& j) {
  BeliefMap out;
  try {
    for (const auto& [key, value] : j.items()) {
      LevelBelief b;
      b.vehicle = std::stoll(key);
      b.p = value.at("p").get<std::array<double, kNumLevels>>();
      read_optional(value, "updates", b.updates);
      b.validate();
      out.emplace(b.vehicle, b);
    }
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("malformed belief table: ") + e.what());
  } catch (const std::logic_error& e) {
    throw SchemaError(std::string("malformed belief table: ") + e.what());
  }
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_json_file(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace levelk
