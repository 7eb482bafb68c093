#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "levelk/belief.hpp"
#include "levelk/maneuver.hpp"
#include "levelk/policy.hpp"
#include "levelk/scene.hpp"

namespace levelk {

using Json = nlohmann::json;

void to_json(Json& j, ManeuverType m);
void from_json(const Json& j, ManeuverType& m);
void to_json(Json& j, const RoadGeometry& road);
void from_json(const Json& j, RoadGeometry& road);
void to_json(Json& j, const VehicleState& s);
void from_json(const Json& j, VehicleState& s);
void to_json(Json& j, const ManeuverParams& p);
void from_json(const Json& j, ManeuverParams& p);
void to_json(Json& j, const Policy& p);
void to_json(Json& j, const LevelBelief& b);

Json scene_to_json(const Scene& scene);
Scene scene_from_json(const Json& j);

/// {"<id>": {"p": [p0, p1, p2], "updates": n}, ...}
Json beliefs_to_json(const BeliefMap& beliefs);
BeliefMap beliefs_from_json(const Json& j);

/// Parses a whole file; throws IoError when unreadable and SchemaError when malformed.
Json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline; throws IoError on failure.
void write_json_file(const Json& j, const std::filesystem::path& path);

/// Reads `key` into `value` when present, leaving the default otherwise.
template <typename T>
void read_optional(const Json& j, const char* key, T& value) {
  if (auto it = j.find(key); it != j.end()) value = it->template get<T>();
}

}  // namespace levelk
