#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levelk/maneuver.hpp"
#include "levelk/vehicle.hpp"

namespace levelk {

inline constexpr double kFeetToMeters = 0.3048;
inline constexpr int kPackageSchemaVersion = 1;

/// CSV column names; defaults follow the NGSIM trajectory release.
struct ColumnMapping {
  std::string vehicle_id = "Vehicle_ID";
  std::string frame_id = "Frame_ID";
  std::string local_x = "Local_X";
  std::string local_y = "Local_Y";
  std::string velocity = "v_Vel";
  std::string length = "v_Length";
  std::string width = "v_Width";
  std::string lane_id = "Lane_ID";
  std::string acceleration = "v_Acc";  // optional column
};

struct PipelineConfig {
  ColumnMapping columns;
  RoadGeometry road{5, 3.6576, 700.0};
  double frame_dt = 0.1;
  int sg_window = 11;
  int sg_polyorder = 3;
  double window_longitudinal = 150.0 * kFeetToMeters;  // full extent, split symmetrically
  double window_lateral = 30.0 * kFeetToMeters;
  /// Local_X measured from the left road edge (NGSIM); flipped so y grows leftward from the right edge.
  bool lateral_from_left = true;
  /// Frames within this many seconds of a lane index change are labeled as the lane change.
  double label_context = 1.0;
  /// Longitudinal acceleration (m/s^2) beyond which a frame is labeled Accelerate/Decelerate.
  double accel_threshold = 0.3;

  void validate() const;
};

/// One CSV record, in the file's units (feet, feet/s).
struct RawTrajectoryRow {
  VehicleId vehicle_id = 0;
  long frame_id = 0;
  double local_x = 0.0;  // lateral, ft
  double local_y = 0.0;  // longitudinal, ft
  double length = 0.0;
  double width = 0.0;
  double velocity = 0.0;
  int lane_id = 0;
  std::optional<double> acceleration;
};

/// Throws SchemaError naming any missing required column or malformed value.
std::vector<RawTrajectoryRow> read_trajectory_csv(std::istream& in, const ColumnMapping& columns);

/// Rows grouped per vehicle, sorted by frame. Throws SchemaError on duplicate
/// or non-contiguous frames.
std::map<VehicleId, std::vector<RawTrajectoryRow>> group_by_vehicle(
    std::vector<RawTrajectoryRow> rows);

struct RoadPoint {
  double x;  // longitudinal, m
  double y;  // lateral, m
};

/// NGSIM local coordinates are already road-aligned: relabel axes and convert to metres.
std::vector<RoadPoint> project_to_road_frame(std::span<const RawTrajectoryRow> rows,
                                             const PipelineConfig& config);

/// Polyline centre line for projecting global coordinates into (arc length, signed offset).
class ReferenceLine {
 public:
  explicit ReferenceLine(std::vector<RoadPoint> points);

  struct Projection {
    double s;  // arc length along the line
    double d;  // signed lateral offset, positive to the left
  };
  Projection project(double gx, double gy) const;
  double length() const { return cumulative_.back(); }

 private:
  std::vector<RoadPoint> points_;
  std::vector<double> cumulative_;
};

/// Road-frame states of one vehicle at consecutive frames.
struct ProcessedTrack {
  VehicleId id = 0;
  long first_frame = 0;
  bool has_acceleration = false;
  std::vector<VehicleState> states;
};

/// project -> finite differences -> Savitzky-Golay smoothing of both velocity components.
ProcessedTrack process_track(std::span<const RawTrajectoryRow> rows, const PipelineConfig& config);

/// Vehicles inside the window centred on the ego (bounds inclusive), sorted by
/// |dx| then id. The ego itself is excluded.
std::vector<VehicleState> extract_neighbors(std::span<const VehicleState> frame_vehicles,
                                            const VehicleState& ego, double window_longitudinal,
                                            double window_lateral);

struct EgoFrame {
  long frame = 0;
  double t = 0.0;
  VehicleState ego;
  std::vector<VehicleState> neighbors;  // possibly empty
};

struct EgoPackage {
  VehicleId ego_id = 0;
  double dt = 0.1;
  bool has_acceleration = false;
  std::vector<EgoFrame> frames;
};

/// One package per track, frames in order, neighbours drawn from all tracks
/// present at the same frame. Output is sorted by ego id.
std::vector<EgoPackage> package_per_ego(std::span<const ProcessedTrack> tracks, double dt,
                                        double window_longitudinal, double window_lateral);

void write_package(const EgoPackage& package, std::ostream& out);
/// Writes `<ego_id>.jsonl` into `dir`; throws IoError with the path on failure.
std::filesystem::path write_package_file(const EgoPackage& package,
                                         const std::filesystem::path& dir);
EgoPackage read_package(std::istream& in);
EgoPackage read_package_file(const std::filesystem::path& path);

struct ManifestEntry {
  VehicleId ego_id;
  std::string file;
  std::size_t frames;
};

struct Manifest {
  std::vector<ManifestEntry> packages;
  std::size_t total_frames() const;
};

void write_manifest(const Manifest& manifest, const std::filesystem::path& dir);
Manifest read_manifest(const std::filesystem::path& dir);

/// Ground-truth maneuver label per frame, for every vehicle of a dataset.
struct LabelTrack {
  long first_frame = 0;
  std::vector<ManeuverType> labels;
};

struct GroundTruth {
  double dt = 0.1;
  std::map<VehicleId, LabelTrack> tracks;

  /// Label at a frame; nullopt outside the track.
  std::optional<ManeuverType> label_at(VehicleId id, long frame) const;
};

void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth read_ground_truth(const std::filesystem::path& path);

/// Labels one track: frames within label_context of a lane index change get
/// the lane change, otherwise the sign of the smoothed longitudinal
/// acceleration beyond accel_threshold picks Accelerate/Decelerate.
std::vector<ManeuverType> label_track(const ProcessedTrack& track, const PipelineConfig& config);

/// CSV -> packages + manifest + labels in out_dir.
Manifest run_pipeline(std::istream& csv, const std::filesystem::path& out_dir,
                      const PipelineConfig& config);

}  // namespace levelk
