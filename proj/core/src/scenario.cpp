#include "levelk/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "levelk/error.hpp"
#include "levelk/serialization.hpp"

namespace levelk {
namespace {

// Fixed-width engine and explicit scaling so draws do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  int below(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }

 private:
  std::mt19937_64 engine_;
};

bool collision_free(const std::vector<VehicleState>& vehicles) {
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    for (std::size_t j = i + 1; j < vehicles.size(); ++j) {
      if (rects_overlap(envelope_box(vehicles[i]), envelope_box(vehicles[j]))) return false;
    }
  }
  return true;
}

// Nearest vehicle ahead in the same lane, if any.
const VehicleState* leader_of(const VehicleState& v, const std::vector<VehicleState>& all) {
  const VehicleState* best = nullptr;
  for (const VehicleState& o : all) {
    if (o.id == v.id || o.lane != v.lane || o.x <= v.x) continue;
    if (!best || o.x < best->x) best = &o;
  }
  return best;
}

}  // namespace

void ScenarioSpec::validate(double vmax) const {
  road.validate();
  if (num_vehicles < 1) throw InvalidArgument("scenario needs at least one vehicle");
  if (!levels.empty()) {
    if (levels.size() != static_cast<std::size_t>(num_vehicles)) {
      throw InvalidArgument("scenario lists levels for a different number of vehicles");
    }
    const int lowest = initial.empty() ? 0 : kCruiseLevel;
    for (int k : levels) {
      if (k < lowest || k > kMaxLevel) throw InvalidArgument("vehicle level out of range");
    }
  }
  if (cruisers < 0) throw InvalidArgument("cruiser count must be non-negative");
  if (cruisers > 0) {
    if (!initial.empty()) throw InvalidArgument("cruisers need random placement");
    if (cruiser_min_speed < 0.0 || cruiser_max_speed < cruiser_min_speed ||
        cruiser_max_speed > vmax || cruiser_ahead < 0.0) {
      throw InvalidArgument("cruiser speeds must satisfy 0 <= min <= max <= vmax");
    }
  }
  if (!initial.empty() && initial.size() != static_cast<std::size_t>(num_vehicles)) {
    throw InvalidArgument("scenario lists initial states for a different number of vehicles");
  }
  if (min_speed < 0.0 || max_speed < min_speed || max_speed > vmax) {
    throw InvalidArgument("initial speeds must satisfy 0 <= min <= max <= vmax");
  }
  if (!(episode_length > 0.0) || !(dt > 0.0)) {
    throw InvalidArgument("episode length and step must be positive");
  }
  if (!(spread_per_vehicle > 0.0) || !(vehicle_length > 0.0) || !(vehicle_width > 0.0)) {
    throw InvalidArgument("spacing and vehicle dimensions must be positive");
  }
}

nlohmann::json scenario_to_json(const ScenarioSpec& spec) {
  Json j{{"seed", spec.seed},
         {"num_vehicles", spec.num_vehicles},
         {"road", spec.road},
         {"levels", spec.levels},
         {"spread_per_vehicle", spec.spread_per_vehicle},
         {"min_speed", spec.min_speed},
         {"max_speed", spec.max_speed},
         {"vehicle_length", spec.vehicle_length},
         {"vehicle_width", spec.vehicle_width},
         {"episode_length", spec.episode_length},
         {"dt", spec.dt},
         {"max_retries", spec.max_retries},
         {"follow_leader", spec.follow_leader},
         {"cruisers", spec.cruisers},
         {"cruiser_min_speed", spec.cruiser_min_speed},
         {"cruiser_max_speed", spec.cruiser_max_speed},
         {"cruiser_ahead", spec.cruiser_ahead}};
  if (!spec.initial.empty()) j["initial"] = spec.initial;
  return j;
}

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  ScenarioSpec s;
  try {
    read_optional(j, "seed", s.seed);
    read_optional(j, "num_vehicles", s.num_vehicles);
    read_optional(j, "road", s.road);
    read_optional(j, "levels", s.levels);
    read_optional(j, "spread_per_vehicle", s.spread_per_vehicle);
    read_optional(j, "min_speed", s.min_speed);
    read_optional(j, "max_speed", s.max_speed);
    read_optional(j, "vehicle_length", s.vehicle_length);
    read_optional(j, "vehicle_width", s.vehicle_width);
    read_optional(j, "episode_length", s.episode_length);
    read_optional(j, "dt", s.dt);
    read_optional(j, "max_retries", s.max_retries);
    read_optional(j, "follow_leader", s.follow_leader);
    read_optional(j, "cruisers", s.cruisers);
    read_optional(j, "cruiser_min_speed", s.cruiser_min_speed);
    read_optional(j, "cruiser_max_speed", s.cruiser_max_speed);
    read_optional(j, "cruiser_ahead", s.cruiser_ahead);
    read_optional(j, "initial", s.initial);
    if (!s.initial.empty() && !j.contains("num_vehicles")) {
      s.num_vehicles = static_cast<int>(s.initial.size());
    }
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("malformed scenario: ") + e.what());
  }
  return s;
}

Scene initial_scene(const ScenarioSpec& spec) {
  if (!spec.initial.empty()) {
    if (!collision_free(spec.initial)) throw InvalidArgument("explicit initial states overlap");
    return Scene(0.0, spec.initial, spec.road, spec.initial.front().id);
  }
  Rng rng(spec.seed);
  const double extent = spec.num_vehicles * spec.spread_per_vehicle;
  for (int attempt = 0; attempt < spec.max_retries; ++attempt) {
    std::vector<VehicleState> vehicles;
    for (int i = 0; i < spec.num_vehicles; ++i) {
      VehicleState v;
      v.id = i + 1;
      v.lane = rng.below(spec.road.num_lanes);
      v.x = rng.uniform(0.0, extent);
      v.y = spec.road.lane_center(v.lane);
      v.vx = rng.uniform(spec.min_speed, spec.max_speed);
      v.length = spec.vehicle_length;
      v.width = spec.vehicle_width;
      vehicles.push_back(v);
    }
    for (int i = 0; i < spec.cruisers; ++i) {
      VehicleState v;
      v.id = spec.num_vehicles + i + 1;
      v.lane = rng.below(spec.road.num_lanes);
      v.x = extent + spec.cruiser_ahead + rng.uniform(0.0, spec.cruisers * spec.spread_per_vehicle);
      v.y = spec.road.lane_center(v.lane);
      v.vx = rng.uniform(spec.cruiser_min_speed, spec.cruiser_max_speed);
      v.length = spec.vehicle_length;
      v.width = spec.vehicle_width;
      vehicles.push_back(v);
    }
    if (collision_free(vehicles)) return Scene(0.0, std::move(vehicles), spec.road, 1);
  }
  throw InvalidArgument("no collision-free placement after " + std::to_string(spec.max_retries) +
                        " attempts");
}

Episode generate_episode(const ScenarioSpec& spec, const SolverConfig& solver,
                         const RewardWeights& weights, const CarFollowingParams& following) {
  spec.validate(solver.maneuver.vmax);
  if (std::abs(spec.dt - solver.horizon.dt) > 1e-12) {
    throw InvalidArgument("scenario step must match the planning step");
  }
  Episode ep;
  ep.spec = spec;
  Scene scene = initial_scene(spec);
  const std::size_t m = scene.size();

  // Level draws use a stream separate from placement.
  Rng level_rng(spec.seed ^ 0x9E3779B97F4A7C15ULL);
  const std::size_t strategic = spec.initial.empty() ? static_cast<std::size_t>(spec.num_vehicles) : m;
  for (std::size_t v = 0; v < m; ++v) {
    int k = kCruiseLevel;
    if (v < strategic) k = spec.levels.empty() ? level_rng.below(kMaxLevel + 1) : spec.levels[v];
    ep.levels.emplace(scene.vehicles()[v].id, k);
  }
  ep.spec.levels.clear();
  for (std::size_t v = 0; v < strategic; ++v) {
    ep.spec.levels.push_back(ep.levels.at(scene.vehicles()[v].id));
  }

  const long steps = std::lround(spec.episode_length / spec.dt);
  std::vector<ManeuverInstance> active(m);
  std::vector<double> replan_at(m, 0.0);
  ep.frames.reserve(static_cast<std::size_t>(steps) + 1);
  ep.frames.push_back(scene);

  for (long n = 0; n <= steps; ++n) {
    const double t = static_cast<double>(n) * spec.dt;
    std::vector<std::size_t> due;
    std::vector<std::size_t> cruising;
    for (std::size_t v = 0; v < m; ++v) {
      if (n != 0 && t < replan_at[v] - 1e-9) continue;
      (ep.levels.at(scene.vehicles()[v].id) == kCruiseLevel ? cruising : due).push_back(v);
    }
    for (std::size_t v : cruising) {
      active[v] = ManeuverInstance{ManeuverType::kNoAction, t, scene.vehicles()[v], solver.maneuver};
      replan_at[v] = std::numeric_limits<double>::infinity();
      ep.segments.push_back({scene.vehicles()[v].id, active[v].type, n, t, active[v].start_state});
    }
    if (!due.empty()) {
      int top = 0;
      for (std::size_t v : due) top = std::max(top, ep.levels.at(scene.vehicles()[v].id));
      const LevelPolicyTable table = solve_level_hierarchy(scene, solver, weights, top);
      for (std::size_t v : due) {
        const VehicleId id = scene.vehicles()[v].id;
        active[v] = table.at(id)[ep.levels.at(id)].maneuvers.front();
        replan_at[v] = active[v].end_time();
        ep.segments.push_back({id, active[v].type, n, t, active[v].start_state});
      }
    }
    for (std::size_t v = 0; v < m; ++v) ep.labels[scene.vehicles()[v].id].push_back(active[v].type);
    if (n == steps) break;

    const double next_t = static_cast<double>(n + 1) * spec.dt;
    std::vector<VehicleState> next;
    next.reserve(m);
    for (std::size_t v = 0; v < m; ++v) next.push_back(evaluate_maneuver(active[v], next_t, scene.road()));

    if (spec.follow_leader) {
      const ManeuverParams& p = solver.maneuver;
      for (std::size_t v = 0; v < m; ++v) {
        if (active[v].type != ManeuverType::kNoAction) continue;
        const VehicleState& cur = scene.vehicles()[v];
        const VehicleState* lead = leader_of(cur, scene.vehicles());
        if (!lead) continue;
        const double gap = lead->x - cur.x - 0.5 * (lead->length + cur.length);
        if (gap >= following.c1 + following.c2 * cur.vx) continue;
        const double a = std::clamp(car_following_accel(following, cur.vx, lead->vx, gap),
                                    -p.decel_rate, p.accel_rate);
        VehicleState s = cur;
        s.vx = std::clamp(cur.vx + a * spec.dt, p.vmin, std::max(p.vmax, cur.vx));
        s.x = cur.x + 0.5 * (cur.vx + s.vx) * spec.dt;
        s.ax = a;
        next[v] = s;
        active[v].start_state = s;
        active[v].start_time = next_t;
      }
    }
    scene = scene.with_vehicles(next_t, std::move(next));
    ep.frames.push_back(scene);
  }
  return ep;
}

std::vector<EgoPackage> episode_packages(const Episode& episode, double window_longitudinal,
                                         double window_lateral) {
  std::vector<ProcessedTrack> tracks;
  for (const VehicleState& v : episode.frames.front().vehicles()) {
    ProcessedTrack t{v.id, 0, true, {}};
    t.states.reserve(episode.frames.size());
    for (const Scene& s : episode.frames) t.states.push_back(s.at(v.id));
    tracks.push_back(std::move(t));
  }
  return package_per_ego(tracks, episode.spec.dt, window_longitudinal, window_lateral);
}

GroundTruth episode_ground_truth(const Episode& episode) {
  GroundTruth truth;
  truth.dt = episode.spec.dt;
  for (const auto& [id, labels] : episode.labels) truth.tracks.emplace(id, LabelTrack{0, labels});
  return truth;
}

Manifest write_episode(const Episode& episode, const std::filesystem::path& dir,
                       double window_longitudinal, double window_lateral) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  Manifest manifest;
  for (const EgoPackage& pkg : episode_packages(episode, window_longitudinal, window_lateral)) {
    const auto path = write_package_file(pkg, dir);
    manifest.packages.push_back({pkg.ego_id, path.filename().string(), pkg.frames.size()});
  }
  write_manifest(manifest, dir);
  write_ground_truth(episode_ground_truth(episode), dir / "labels.json");

  Json segments = Json::array();
  for (const ManeuverSegment& s : episode.segments) {
    segments.push_back(Json{{"vehicle", s.vehicle},
                            {"type", s.type},
                            {"start_step", s.start_step},
                            {"start_time", s.start_time}});
  }
  Json levels = Json::object();
  for (const auto& [id, k] : episode.levels) levels[std::to_string(id)] = k;
  write_json_file(Json{{"scenario", scenario_to_json(episode.spec)},
                       {"levels", std::move(levels)},
                       {"segments", std::move(segments)}},
                  dir / "scenario.json");
  return manifest;
}

}  // namespace levelk
