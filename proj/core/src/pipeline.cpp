#include "levelk/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "levelk/error.hpp"
#include "levelk/filters.hpp"
#include "levelk/serialization.hpp"

namespace levelk {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_field(std::string_view text, const std::string& column, std::size_t line_no) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw SchemaError("line " + std::to_string(line_no) + ": column " + column +
                      " has malformed value '" + std::string(text) + "'");
  }
  return value;
}

Json vehicle_record(const VehicleState& s, bool with_acceleration) {
  Json j{{"id", s.id},       {"x", s.x},         {"y", s.y},       {"vx", s.vx},
         {"vy", s.vy},       {"lane", s.lane},   {"length", s.length},
         {"width", s.width}};
  if (with_acceleration) {
    j["ax"] = s.ax;
    j["ay"] = s.ay;
  }
  return j;
}

}  // namespace

void PipelineConfig::validate() const {
  try {
    road.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (!(frame_dt > 0.0)) throw ConfigError("frame_dt must be positive");
  if (sg_window % 2 == 0 || sg_polyorder < 0 || sg_polyorder >= sg_window) {
    throw ConfigError("filter needs an odd window larger than the polynomial order");
  }
  if (!(window_longitudinal > 0.0) || !(window_lateral > 0.0)) {
    throw ConfigError("neighbour window extents must be positive");
  }
  if (label_context < 0.0 || accel_threshold < 0.0) {
    throw ConfigError("labeling thresholds must be non-negative");
  }
}

std::vector<RawTrajectoryRow> read_trajectory_csv(std::istream& in, const ColumnMapping& columns) {
  std::string line;
  std::size_t line_no = 0;
  // An entirely empty input is a valid, empty dataset.
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) return {};

  const std::vector<std::string_view> header = split_csv(line);
  auto column_index = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  auto required = [&](const std::string& name) {
    auto idx = column_index(name);
    if (!idx) throw SchemaError("missing required column " + name);
    return *idx;
  };
  const std::size_t c_id = required(columns.vehicle_id);
  const std::size_t c_frame = required(columns.frame_id);
  const std::size_t c_lx = required(columns.local_x);
  const std::size_t c_ly = required(columns.local_y);
  const std::size_t c_vel = required(columns.velocity);
  const std::size_t c_len = required(columns.length);
  const std::size_t c_wid = required(columns.width);
  const std::size_t c_lane = required(columns.lane_id);
  const std::optional<std::size_t> c_acc = column_index(columns.acceleration);

  std::vector<RawTrajectoryRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string_view> f = split_csv(line);
    if (f.size() < header.size()) {
      throw SchemaError("line " + std::to_string(line_no) + " has " + std::to_string(f.size()) +
                        " fields, header has " + std::to_string(header.size()));
    }
    RawTrajectoryRow row;
    row.vehicle_id = parse_field<VehicleId>(f[c_id], columns.vehicle_id, line_no);
    row.frame_id = parse_field<long>(f[c_frame], columns.frame_id, line_no);
    row.local_x = parse_field<double>(f[c_lx], columns.local_x, line_no);
    row.local_y = parse_field<double>(f[c_ly], columns.local_y, line_no);
    row.velocity = parse_field<double>(f[c_vel], columns.velocity, line_no);
    row.length = parse_field<double>(f[c_len], columns.length, line_no);
    row.width = parse_field<double>(f[c_wid], columns.width, line_no);
    row.lane_id = parse_field<int>(f[c_lane], columns.lane_id, line_no);
    if (c_acc) row.acceleration = parse_field<double>(f[*c_acc], columns.acceleration, line_no);
    rows.push_back(row);
  }
  return rows;
}

std::map<VehicleId, std::vector<RawTrajectoryRow>> group_by_vehicle(
    std::vector<RawTrajectoryRow> rows) {
  std::map<VehicleId, std::vector<RawTrajectoryRow>> out;
  for (RawTrajectoryRow& r : rows) out[r.vehicle_id].push_back(std::move(r));
  for (auto& [id, track] : out) {
    std::sort(track.begin(), track.end(),
              [](const RawTrajectoryRow& a, const RawTrajectoryRow& b) { return a.frame_id < b.frame_id; });
    for (std::size_t i = 1; i < track.size(); ++i) {
      if (track[i].frame_id == track[i - 1].frame_id) {
        throw SchemaError("vehicle " + std::to_string(id) + " has duplicate frame " +
                          std::to_string(track[i].frame_id));
      }
      if (track[i].frame_id != track[i - 1].frame_id + 1) {
        throw SchemaError("vehicle " + std::to_string(id) + " skips from frame " +
                          std::to_string(track[i - 1].frame_id) + " to " +
                          std::to_string(track[i].frame_id));
      }
    }
  }
  return out;
}

std::vector<RoadPoint> project_to_road_frame(std::span<const RawTrajectoryRow> rows,
                                             const PipelineConfig& config) {
  std::vector<RoadPoint> out;
  out.reserve(rows.size());
  const double road_width = config.road.width();
  for (const RawTrajectoryRow& r : rows) {
    const double lateral = r.local_x * kFeetToMeters;
    out.push_back({r.local_y * kFeetToMeters, config.lateral_from_left ? road_width - lateral : lateral});
  }
  return out;
}

ReferenceLine::ReferenceLine(std::vector<RoadPoint> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw InvalidArgument("reference line needs at least two points");
  cumulative_.resize(points_.size(), 0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    cumulative_[i] = cumulative_[i - 1] + std::hypot(points_[i].x - points_[i - 1].x,
                                                     points_[i].y - points_[i - 1].y);
  }
}

ReferenceLine::Projection ReferenceLine::project(double gx, double gy) const {
  Projection best{0.0, 0.0};
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const double ex = points_[i + 1].x - points_[i].x;
    const double ey = points_[i + 1].y - points_[i].y;
    const double len2 = ex * ex + ey * ey;
    if (len2 == 0.0) continue;
    const double u = std::clamp(((gx - points_[i].x) * ex + (gy - points_[i].y) * ey) / len2, 0.0, 1.0);
    const double px = points_[i].x + u * ex;
    const double py = points_[i].y + u * ey;
    const double d2 = (gx - px) * (gx - px) + (gy - py) * (gy - py);
    if (d2 < best_d2) {
      best_d2 = d2;
      const double cross = ex * (gy - points_[i].y) - ey * (gx - points_[i].x);
      best = {cumulative_[i] + u * std::sqrt(len2), std::copysign(std::sqrt(d2), cross)};
    }
  }
  return best;
}

ProcessedTrack process_track(std::span<const RawTrajectoryRow> rows, const PipelineConfig& config) {
  ProcessedTrack track;
  if (rows.empty()) return track;
  track.id = rows.front().vehicle_id;
  track.first_frame = rows.front().frame_id;
  track.has_acceleration = rows.front().acceleration.has_value();

  const std::vector<RoadPoint> points = project_to_road_frame(rows, config);
  std::vector<double> xs, ys;
  for (const RoadPoint& p : points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  std::vector<double> vx(rows.size(), rows.front().velocity * kFeetToMeters);
  std::vector<double> vy(rows.size(), 0.0);
  if (rows.size() >= 2) {
    vx = finite_difference_velocity(xs, config.frame_dt);
    vy = finite_difference_velocity(ys, config.frame_dt);
    if (rows.size() >= static_cast<std::size_t>(config.sg_window)) {
      vx = savitzky_golay(vx, config.sg_window, config.sg_polyorder);
      vy = savitzky_golay(vy, config.sg_window, config.sg_polyorder);
    }
  }

  const RoadGeometry& road = config.road;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    VehicleState s;
    s.id = track.id;
    s.x = xs[i];
    s.y = ys[i];
    s.vx = vx[i];
    s.vy = vy[i];
    s.length = rows[i].length * kFeetToMeters;
    s.width = rows[i].width * kFeetToMeters;
    if (rows[i].acceleration) s.ax = *rows[i].acceleration * kFeetToMeters;
    // Lane_ID counts from the left edge starting at 1.
    const int lane = road.num_lanes - rows[i].lane_id;
    const bool consistent = road.valid_lane(lane) &&
                            std::abs(s.y - road.lane_center(lane)) <= 0.5 * road.lane_width;
    s.lane = consistent ? lane : road.lane_at(s.y);
    track.states.push_back(s);
  }
  return track;
}

std::vector<VehicleState> extract_neighbors(std::span<const VehicleState> frame_vehicles,
                                            const VehicleState& ego, double window_longitudinal,
                                            double window_lateral) {
  constexpr double kBoundSlack = 1e-9;
  const double half_x = 0.5 * window_longitudinal + kBoundSlack;
  const double half_y = 0.5 * window_lateral + kBoundSlack;
  std::vector<VehicleState> out;
  for (const VehicleState& v : frame_vehicles) {
    if (v.id == ego.id) continue;
    if (std::abs(v.x - ego.x) <= half_x && std::abs(v.y - ego.y) <= half_y) out.push_back(v);
  }
  std::sort(out.begin(), out.end(), [&](const VehicleState& a, const VehicleState& b) {
    const double da = std::abs(a.x - ego.x);
    const double db = std::abs(b.x - ego.x);
    return da != db ? da < db : a.id < b.id;
  });
  return out;
}

std::vector<EgoPackage> package_per_ego(std::span<const ProcessedTrack> tracks, double dt,
                                        double window_longitudinal, double window_lateral) {
  std::map<long, std::vector<VehicleState>> by_frame;
  for (const ProcessedTrack& t : tracks) {
    for (std::size_t i = 0; i < t.states.size(); ++i) {
      by_frame[t.first_frame + static_cast<long>(i)].push_back(t.states[i]);
    }
  }
  std::vector<EgoPackage> out;
  out.reserve(tracks.size());
  for (const ProcessedTrack& t : tracks) {
    EgoPackage pkg{t.id, dt, t.has_acceleration, {}};
    pkg.frames.reserve(t.states.size());
    for (std::size_t i = 0; i < t.states.size(); ++i) {
      const long frame = t.first_frame + static_cast<long>(i);
      pkg.frames.push_back({frame, static_cast<double>(frame) * dt, t.states[i],
                            extract_neighbors(by_frame[frame], t.states[i], window_longitudinal,
                                              window_lateral)});
    }
    out.push_back(std::move(pkg));
  }
  std::sort(out.begin(), out.end(),
            [](const EgoPackage& a, const EgoPackage& b) { return a.ego_id < b.ego_id; });
  return out;
}

void write_package(const EgoPackage& pkg, std::ostream& out) {
  std::vector<std::string> fields{"id", "x", "y", "vx", "vy", "lane", "length", "width"};
  if (pkg.has_acceleration) {
    fields.push_back("ax");
    fields.push_back("ay");
  }
  const Json header{{"kind", "header"},
                    {"schema_version", kPackageSchemaVersion},
                    {"ego_id", pkg.ego_id},
                    {"dt", pkg.dt},
                    {"frames", pkg.frames.size()},
                    {"fields", fields}};
  out << header.dump() << '\n';
  for (const EgoFrame& f : pkg.frames) {
    Json neighbors = Json::array();
    for (const VehicleState& n : f.neighbors) neighbors.push_back(vehicle_record(n, pkg.has_acceleration));
    const Json record{{"frame", f.frame},
                      {"t", f.t},
                      {"ego", vehicle_record(f.ego, pkg.has_acceleration)},
                      {"neighbors", std::move(neighbors)}};
    out << record.dump() << '\n';
  }
}

std::filesystem::path write_package_file(const EgoPackage& pkg, const std::filesystem::path& dir) {
  const std::filesystem::path path = dir / (std::to_string(pkg.ego_id) + ".jsonl");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write package " + path.string());
  write_package(pkg, out);
  if (!out) throw IoError("write failed for package " + path.string());
  return path;
}

EgoPackage read_package(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("package is empty");
  EgoPackage pkg;
  try {
    const Json header = Json::parse(line);
    if (header.value("kind", "") != "header") throw SchemaError("package lacks a header record");
    pkg.ego_id = header.at("ego_id").get<VehicleId>();
    pkg.dt = header.at("dt").get<double>();
    const auto fields = header.at("fields").get<std::vector<std::string>>();
    pkg.has_acceleration = std::find(fields.begin(), fields.end(), "ax") != fields.end();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const Json record = Json::parse(line);
      EgoFrame f;
      f.frame = record.at("frame").get<long>();
      f.t = record.at("t").get<double>();
      f.ego = record.at("ego").get<VehicleState>();
      f.neighbors = record.at("neighbors").get<std::vector<VehicleState>>();
      pkg.frames.push_back(std::move(f));
    }
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("malformed package: ") + e.what());
  }
  for (std::size_t i = 1; i < pkg.frames.size(); ++i) {
    if (pkg.frames[i].frame != pkg.frames[i - 1].frame + 1) {
      throw SchemaError("package of vehicle " + std::to_string(pkg.ego_id) +
                        " has non-consecutive frames");
    }
  }
  return pkg;
}

EgoPackage read_package_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open package " + path.string());
  try {
    return read_package(in);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::size_t Manifest::total_frames() const {
  std::size_t total = 0;
  for (const ManifestEntry& e : packages) total += e.frames;
  return total;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& dir) {
  Json packages = Json::array();
  for (const ManifestEntry& e : manifest.packages) {
    packages.push_back(Json{{"ego_id", e.ego_id}, {"file", e.file}, {"frames", e.frames}});
  }
  write_json_file(Json{{"schema_version", kPackageSchemaVersion},
                       {"packages", std::move(packages)},
                       {"total_frames", manifest.total_frames()}},
                  dir / "manifest.json");
}

Manifest read_manifest(const std::filesystem::path& dir) {
  const Json j = read_json_file(dir / "manifest.json");
  Manifest m;
  try {
    for (const Json& e : j.at("packages")) {
      m.packages.push_back({e.at("ego_id").get<VehicleId>(), e.at("file").get<std::string>(),
                            e.at("frames").get<std::size_t>()});
    }
  } catch (const Json::exception& e) {
    throw SchemaError((dir / "manifest.json").string() + ": " + e.what());
  }
  return m;
}

std::optional<ManeuverType> GroundTruth::label_at(VehicleId id, long frame) const {
  auto it = tracks.find(id);
  if (it == tracks.end()) return std::nullopt;
  const long offset = frame - it->second.first_frame;
  if (offset < 0 || offset >= static_cast<long>(it->second.labels.size())) return std::nullopt;
  return it->second.labels[static_cast<std::size_t>(offset)];
}

void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  Json tracks = Json::object();
  for (const auto& [id, t] : truth.tracks) {
    tracks[std::to_string(id)] = Json{{"first_frame", t.first_frame}, {"labels", t.labels}};
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << Json{{"dt", truth.dt}, {"tracks", std::move(tracks)}}.dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  GroundTruth truth;
  try {
    truth.dt = j.at("dt").get<double>();
    for (const auto& [key, value] : j.at("tracks").items()) {
      truth.tracks.emplace(std::stoll(key),
                           LabelTrack{value.at("first_frame").get<long>(),
                                      value.at("labels").get<std::vector<ManeuverType>>()});
    }
  } catch (const Json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return truth;
}

std::vector<ManeuverType> label_track(const ProcessedTrack& track, const PipelineConfig& config) {
  const std::size_t n = track.states.size();
  std::vector<ManeuverType> labels(n, ManeuverType::kNoAction);
  if (n == 0) return labels;

  std::vector<double> ax(n, 0.0);
  if (track.has_acceleration) {
    for (std::size_t i = 0; i < n; ++i) ax[i] = track.states[i].ax;
  } else if (n >= 2) {
    std::vector<double> vx(n);
    for (std::size_t i = 0; i < n; ++i) vx[i] = track.states[i].vx;
    ax = finite_difference_velocity(vx, config.frame_dt);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (ax[i] > config.accel_threshold) labels[i] = ManeuverType::kAccelerate;
    else if (ax[i] < -config.accel_threshold) labels[i] = ManeuverType::kDecelerate;
  }

  const long context = std::lround(config.label_context / config.frame_dt);
  for (std::size_t i = 1; i < n; ++i) {
    const int step = track.states[i].lane - track.states[i - 1].lane;
    if (step == 0) continue;
    const ManeuverType lc = step > 0 ? ManeuverType::kLeftLaneChange : ManeuverType::kRightLaneChange;
    const long lo = std::max<long>(0, static_cast<long>(i) - context);
    const long hi = std::min<long>(static_cast<long>(n) - 1, static_cast<long>(i) + context);
    for (long k = lo; k <= hi; ++k) labels[static_cast<std::size_t>(k)] = lc;
  }
  return labels;
}

Manifest run_pipeline(std::istream& csv, const std::filesystem::path& out_dir,
                      const PipelineConfig& config) {
  config.validate();
  const auto grouped = group_by_vehicle(read_trajectory_csv(csv, config.columns));
  std::vector<ProcessedTrack> tracks;
  tracks.reserve(grouped.size());
  GroundTruth truth;
  truth.dt = config.frame_dt;
  for (const auto& [id, rows] : grouped) {
    tracks.push_back(process_track(rows, config));
    truth.tracks.emplace(id, LabelTrack{tracks.back().first_frame, label_track(tracks.back(), config)});
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  Manifest manifest;
  for (const EgoPackage& pkg :
       package_per_ego(tracks, config.frame_dt, config.window_longitudinal, config.window_lateral)) {
    const auto path = write_package_file(pkg, out_dir);
    manifest.packages.push_back({pkg.ego_id, path.filename().string(), pkg.frames.size()});
  }
  write_manifest(manifest, out_dir);
  write_ground_truth(truth, out_dir / "labels.json");
  return manifest;
}

}  // namespace levelk
