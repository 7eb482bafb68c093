#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include <levelk/reward.hpp>

namespace fixtures {

std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(LEVELK_TEST_DATA_DIR) / name;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("levelk_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

levelk::VehicleState car(levelk::VehicleId id, double x, int lane, double vx,
                         const levelk::RoadGeometry& road) {
  levelk::VehicleState v;
  v.id = id;
  v.x = x;
  v.lane = lane;
  v.y = road.lane_center(lane);
  v.vx = vx;
  return v;
}

levelk::Scene random_scene(std::mt19937_64& rng, int m, const levelk::RoadGeometry& road) {
  std::uniform_real_distribution<double> pos(0.0, 12.0 * m);
  std::uniform_real_distribution<double> speed(15.0, 33.0);
  std::uniform_int_distribution<int> lane(0, road.num_lanes - 1);
  for (;;) {
    std::vector<levelk::VehicleState> vs;
    for (int i = 0; i < m; ++i) vs.push_back(car(i + 1, pos(rng), lane(rng), speed(rng), road));
    bool clear = true;
    for (std::size_t a = 0; a < vs.size() && clear; ++a) {
      for (std::size_t b = a + 1; b < vs.size() && clear; ++b) {
        clear = !levelk::rects_overlap(levelk::envelope_box(vs[a]), levelk::envelope_box(vs[b]));
      }
    }
    if (clear) return levelk::Scene(0.0, vs, road, 1);
  }
}

levelk::Scene cut_in_scene() {
  const levelk::RoadGeometry road{2, 3.6, 1000.0};
  return levelk::Scene(0.0, {car(1, 5.0, 1, 20.0, road), car(2, 0.0, 0, 30.0, road), car(3, 30.0, 1, 5.0, road)},
                       road, 1);
}

levelk::SolverConfig small_solver(int depth) {
  levelk::SolverConfig cfg;
  cfg.max_sequence_depth = depth;
  return cfg;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fixtures
