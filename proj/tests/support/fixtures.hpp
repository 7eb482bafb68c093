#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <levelk/scene.hpp>
#include <levelk/solver.hpp>

namespace fixtures {

std::filesystem::path data_path(const std::string& name);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Vehicle centred in `lane`.
levelk::VehicleState car(levelk::VehicleId id, double x, int lane, double vx,
                         const levelk::RoadGeometry& road = {});

/// m vehicles with disjoint safety envelopes, vehicle 1 the target.
levelk::Scene random_scene(std::mt19937_64& rng, int m, const levelk::RoadGeometry& road);

/// Two-lane cut-in: A (1) in the left lane just ahead of a faster B (2) in the
/// right lane, with a slow car C (3) ahead of A. A is the target.
levelk::Scene cut_in_scene();

/// Default solver with a shallower search.
levelk::SolverConfig small_solver(int depth = 2);

std::string read_file(const std::filesystem::path& path);

}  // namespace fixtures
