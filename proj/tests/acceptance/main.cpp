// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/core.h>

#include <levelk/belief.hpp>
#include <levelk/config.hpp>
#include <levelk/evaluation.hpp>
#include <levelk/filters.hpp>
#include <levelk/pipeline.hpp>
#include <levelk/reward.hpp>
#include <levelk/scenario.hpp>
#include <levelk/solver.hpp>
#include <levelk/tracker.hpp>
#include <levelk/training.hpp>

#include "fixtures.hpp"
#include "levelk_cli/commands.hpp"
#include "oracle.hpp"

using namespace levelk;
namespace fs = std::filesystem;
using fixtures::car;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

BeliefMap random_beliefs(const Scene& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  BeliefMap b;
  for (const VehicleState& v : s.vehicles()) {
    if (v.id == s.target_id()) continue;
    const double a = u(rng), c = u(rng), d = u(rng);
    b.emplace(v.id, LevelBelief{v.id, {a / (a + c + d), c / (a + c + d), d / (a + c + d)}, 0});
  }
  return b;
}

BeliefMap uniform_beliefs(const Scene& s) {
  BeliefMap b;
  for (const VehicleState& v : s.vehicles()) {
    if (v.id != s.target_id()) b.emplace(v.id, LevelBelief::uniform(v.id));
  }
  return b;
}

// ---- solver ----------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int matched = 0;
  int total = 0;
  double worst = 0.0;
  for (int i = 0; i < 240; ++i) {
    const int m = 1 + i % 3;
    const RoadGeometry road{1 + (i / 3) % 3, 3.6, 1000.0};
    const Scene s = fixtures::random_scene(rng, m, road);
    const BeliefMap b = random_beliefs(s, rng);
    const SolverConfig cfg = fixtures::small_solver(2);
    const Prediction p = predict_target(s, b, cfg, RewardWeights{});
    const oracle::Result ref = oracle::brute_force(s, b, cfg, RewardWeights{});
    bool same = p.policy.skeleton() == ref.target && std::abs(p.value - ref.value) <= 1e-9;
    for (const auto& [id, levels] : ref.levels) {
      for (int k = 0; k < kNumLevels; ++k) same = same && p.levels.at(id)[k].skeleton() == levels[k];
    }
    worst = std::max(worst, std::abs(p.value - ref.value));
    ++total;
    if (same) ++matched;
  }
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = matched == total && total >= 200 && elapsed < 300.0;
  o.detail = fmt::format("{}/{} scenes identical, max value gap {:.2e}, {:.1f} s", matched, total,
                         worst, elapsed);
  return o;
}

Outcome level_k_fixed_point() {
  std::mt19937_64 rng(31);
  const SolverConfig cfg;
  int fixtures_used = 0;
  int held = 0;
  for (int i = 0; i < 24; ++i) {
    const int lanes = 1 + i % 4;
    const int m = 1 + (i / 4) % 4;
    const RoadGeometry road{lanes, 3.6, 1000.0};
    std::uniform_int_distribution<int> lane(0, lanes - 1);
    std::vector<VehicleState> vs;
    // Everyone at the speed limit, either strung out or nearly abreast.
    const double spacing = i % 2 == 0 ? 150.0 : 3.0;
    for (int v = 0; v < m; ++v) vs.push_back(car(v + 1, spacing * v, lane(rng), 35.0, road));
    bool clear = true;
    for (std::size_t a = 0; a < vs.size(); ++a) {
      for (std::size_t b = a + 1; b < vs.size(); ++b) {
        if (vs[a].lane == vs[b].lane && std::abs(vs[a].x - vs[b].x) < 100.0) clear = false;
      }
    }
    if (!clear) continue;
    const Scene s(0.0, vs, road, 1);
    const LevelPolicyTable t = solve_level_hierarchy(s, cfg, RewardWeights{});
    bool all_hold = true;
    for (const auto& [id, levels] : t) {
      for (const ManeuverInstance& mi : levels[0].maneuvers) all_hold = all_hold && mi.type == ManeuverType::kNoAction;
    }
    if (!all_hold) continue;
    ++fixtures_used;
    bool same = true;
    for (const auto& [id, levels] : t) {
      same = same && levels[1].skeleton() == levels[0].skeleton() && levels[2].skeleton() == levels[0].skeleton();
    }
    if (same) ++held;
  }
  return {fixtures_used >= 10 && held == fixtures_used,
          fmt::format("{}/{} fixtures with all level-0 NoAction keep level 1 and 2 identical", held,
                      fixtures_used)};
}

std::string skeleton_string(const PolicySkeleton& s) {
  std::string out;
  for (ManeuverType m : s) out += (out.empty() ? "" : " ") + std::string(to_string(m));
  return out;
}

Outcome cut_in_reproduction() {
  const Scene s = fixtures::cut_in_scene();
  Outcome o;
  for (int depth : {2, 3}) {
    const LevelPolicyTable t = solve_level_hierarchy(s, fixtures::small_solver(depth), RewardWeights{});
    const PolicySkeleton l0 = t.at(1)[0].skeleton();
    const PolicySkeleton l1 = t.at(1)[1].skeleton();
    const bool immediate = l0.front() == ManeuverType::kRightLaneChange;
    const bool cautious = l1.front() == ManeuverType::kDecelerate ||
                          (l1.front() != ManeuverType::kRightLaneChange &&
                           std::find(l1.begin(), l1.end(), ManeuverType::kRightLaneChange) != l1.end());
    o.pass = o.pass && immediate && cautious;
    o.detail += fmt::format("{}depth {}: L0 [{}], L1 [{}]", o.detail.empty() ? "" : "; ", depth,
                            skeleton_string(l0), skeleton_string(l1));
    if (depth == 2) {
      const oracle::Result ref = oracle::brute_force(s, uniform_beliefs(s), fixtures::small_solver(2), RewardWeights{});
      const bool agrees = ref.levels.at(1)[0] == l0 && ref.levels.at(1)[1] == l1;
      o.pass = o.pass && agrees;
      if (!agrees) o.detail += " (oracle disagrees)";
    }
  }
  return o;
}

// ---- beliefs ---------------------------------------------------------------

bool distinct(const VehicleState& a, const VehicleState& b, const RoadGeometry& road, double t) {
  const Scene sa(t, {a}, road, a.id), sb(t, {b}, road, b.id);
  return joint_state_distance(sa, sb, DistanceWeights{}) > 1e-12;
}

bool on_simplex(const BeliefMap& beliefs) {
  for (const auto& [id, b] : beliefs) {
    if (std::abs(b.p[0] + b.p[1] + b.p[2] - 1.0) > 1e-12) return false;
    for (double p : b.p) {
      if (p < 0.0) return false;
    }
  }
  return true;
}

EgoFrame frame_of(const Scene& s, long frame) {
  EgoFrame f{frame, s.time(), s.target(), {}};
  for (const VehicleState& v : s.vehicles()) {
    if (v.id != s.target_id()) f.neighbors.push_back(v);
  }
  return f;
}

// Tracks vehicle 2 playing level k through a run of encounters. Each encounter
// is a fresh scene in which the three level hypotheses for vehicle 2 lead to
// different states one update later; the tracker sees the scene, the world
// moves on for 0.1 s and the tracker sees the result. Returns the number of
// updates until P(k) > 0.9, or -1.
int updates_to_converge(int k, const SolverConfig& cfg, std::mt19937_64& rng, bool& simplex_ok,
                        int& screened) {
  const RoadGeometry road{3, 3.6, 1000.0};
  const TrackerConfig tc{cfg, RewardWeights{}, BeliefConfig{}, 1.0};
  const double step = 0.1;
  BeliefMap carried;
  int updates = 0;
  for (int attempt = 0; attempt < 40000 && updates < 50; ++attempt) {
    ++screened;
    const Scene s = fixtures::random_scene(rng, 3, road);
    PredictionSession session(tc, road, carried);
    EgoPackage pkg{s.target_id(), step, false, {frame_of(s, 0)}};
    const FramePrediction first = session.observe(pkg, 0);
    const auto& levels = first.detail.levels.at(2);
    std::array<VehicleState, kNumLevels> next;
    for (int j = 0; j < kNumLevels; ++j) next[j] = levels[j].state_at(step, road);
    if (!distinct(next[0], next[1], road, step) || !distinct(next[0], next[2], road, step) ||
        !distinct(next[1], next[2], road, step)) {
      continue;
    }
    std::vector<VehicleState> moved;
    for (const VehicleState& v : s.vehicles()) {
      const Policy& p = v.id == s.target_id() ? first.detail.policy
                        : v.id == 2           ? levels[k]
                                              : first.detail.levels.at(v.id)[first.beliefs.at(v.id).most_likely()];
      VehicleState n = p.state_at(step, road);
      n.id = v.id;
      moved.push_back(n);
    }
    pkg.frames.push_back(frame_of(s.with_vehicles(step, moved), 1));
    session.observe(pkg, 1);
    carried = session.beliefs();
    simplex_ok = simplex_ok && on_simplex(carried);
    ++updates;
    if (carried.at(2).p[k] > 0.9) return updates;
  }
  return -1;
}

Outcome belief_convergence() {
  std::mt19937_64 rng(77);
  const SolverConfig cfg;
  Outcome o;
  bool simplex_ok = true;
  int screened = 0;
  for (int k = 0; k < kNumLevels; ++k) {
    const int n = updates_to_converge(k, cfg, rng, simplex_ok, screened);
    o.pass = o.pass && n > 0 && n <= 50;
    o.detail += fmt::format("{}k={}: {}", k == 0 ? "" : ", ", k, n > 0 ? std::to_string(n) + " updates" : "no convergence");
  }
  o.pass = o.pass && simplex_ok;
  o.detail += fmt::format(" ({} scenes screened)", screened);
  if (!simplex_ok) o.detail += "; simplex violated";
  return o;
}

// ---- reward ----------------------------------------------------------------

Outcome reward_identities() {
  Outcome o;
  const RoadGeometry road;

  // Overlapping parked cars: constant -1 per step under the collision weight alone.
  const Scene stuck(0.0, {car(1, 0, 1, 0.0), car(2, 0, 1, 0.0)}, road, 1);
  PolicySchedule holds;
  for (const VehicleState& v : stuck.vehicles()) holds.emplace(v.id, hold_policy(v, 0.0, ManeuverParams{}));
  double worst_series = 0.0;
  for (double gamma : {0.5, 0.9, 0.99, 1.0}) {
    const double expected = gamma == 1.0 ? -100.0 : -(1.0 - std::pow(gamma, 100)) / (1.0 - gamma);
    const double got = horizon_cost(stuck, holds, HorizonSpec{100, 0.05, gamma}, RewardWeights{1, 0, 0, 0}, 35.0);
    worst_series = std::max(worst_series, std::abs(got - expected));
  }
  o.pass = worst_series <= 1e-9;

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> x(-10, 10), y(-5, 5), len(1, 8), wid(0.5, 3);
  int body_hits = 0;
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    VehicleState a, b;
    a.x = x(rng), a.y = y(rng), a.length = len(rng), a.width = wid(rng);
    b.x = x(rng), b.y = y(rng), b.length = len(rng), b.width = wid(rng);
    if (rects_overlap(body_box(a), body_box(b))) {
      ++body_hits;
      if (!rects_overlap(envelope_box(a), envelope_box(b))) ++violations;
    }
  }
  o.pass = o.pass && violations == 0 && body_hits > 0;

  std::mt19937_64 scenes(61);
  const SolverConfig cfg = fixtures::small_solver(2);
  int invariant = 0;
  for (int i = 0; i < 50; ++i) {
    const RoadGeometry r{2 + i % 2, 3.6, 1000.0};
    const Scene s = fixtures::random_scene(scenes, 1 + i % 3, r);
    const BeliefMap b = random_beliefs(s, scenes);
    const double lambda = 0.25 + 0.5 * (i % 8);
    const Prediction p = predict_target(s, b, cfg, RewardWeights{});
    const Prediction q = predict_target(s, b, cfg, RewardWeights{}.scaled(lambda));
    if (p.policy.skeleton() == q.policy.skeleton()) ++invariant;
  }
  o.pass = o.pass && invariant == 50;
  o.detail = fmt::format("geometric series gap {:.1e}; {} body overlaps, {} without envelope overlap; "
                         "{}/50 argmax unchanged under scaling",
                         worst_series, body_hits, violations, invariant);
  return o;
}

// ---- filters and pipeline ------------------------------------------------

Outcome filter_correctness() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> c(-5, 5);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int degree = trial % 4;
    std::array<double, 4> a{};
    for (int d = 0; d <= degree; ++d) a[d] = c(rng);
    std::vector<double> xs;
    for (int i = 0; i < 60; ++i) {
      const double t = 0.1 * i;
      xs.push_back(a[0] + a[1] * t + a[2] * t * t + a[3] * t * t * t);
    }
    const auto ys = savitzky_golay(xs, 11, 3);
    for (std::size_t i = 0; i < xs.size(); ++i) worst = std::max(worst, std::abs(ys[i] - xs[i]));
  }
  std::vector<double> impulse(11, 0.0);
  impulse[5] = 1.0;
  const double center = savitzky_golay(impulse, 5, 2)[5];
  const double center_weight = savitzky_golay_weights(5, 2, 2)[2];
  const bool pass = worst <= 1e-9 && std::abs(center - 17.0 / 35.0) <= 1e-15 &&
                    std::abs(center_weight - 17.0 / 35.0) <= 1e-15;
  return {pass, fmt::format("max polynomial error {:.1e}; (5,2) impulse centre {:.17g} vs {:.17g}", worst,
                            center, 17.0 / 35.0)};
}

std::string slurp(const fs::path& p) { return fixtures::read_file(p); }

Outcome pipeline_conservation() {
  fixtures::TempDir a, b;
  const fs::path csv = fixtures::data_path("ten_vehicles.csv");
  Manifest ma, mb;
  {
    std::ifstream in(csv);
    ma = run_pipeline(in, a.path(), PipelineConfig{});
  }
  {
    std::ifstream in(csv);
    mb = run_pipeline(in, b.path(), PipelineConfig{});
  }
  std::ifstream in(csv);
  const auto rows = read_trajectory_csv(in, ColumnMapping{});

  std::set<std::tuple<long, VehicleId, VehicleId>> pairs;
  bool identical = slurp(a / "manifest.json") == slurp(b / "manifest.json") &&
                   slurp(a / "labels.json") == slurp(b / "labels.json");
  std::map<VehicleId, std::size_t> rows_per_vehicle;
  for (const auto& r : rows) ++rows_per_vehicle[r.vehicle_id];
  bool conserved = ma.packages.size() == rows_per_vehicle.size() && ma.total_frames() == rows.size();
  for (const ManifestEntry& e : ma.packages) {
    const EgoPackage pkg = read_package_file(a / e.file);
    conserved = conserved && pkg.frames.size() == rows_per_vehicle[e.ego_id];
    for (const EgoFrame& f : pkg.frames) {
      for (const VehicleState& n : f.neighbors) pairs.emplace(f.frame, pkg.ego_id, n.id);
    }
    identical = identical && slurp(a / e.file) == slurp(b / e.file);
  }
  std::size_t asymmetric = 0;
  for (const auto& [frame, x, y] : pairs) {
    if (!pairs.contains({frame, y, x})) ++asymmetric;
  }
  const bool pass = conserved && identical && asymmetric == 0 && !pairs.empty();
  return {pass, fmt::format("{} rows -> {} packages / {} frames; {} neighbour pairs, {} asymmetric; re-run {}",
                            rows.size(), ma.packages.size(), ma.total_frames(), pairs.size(), asymmetric,
                            identical ? "byte-identical" : "differs")};
}

// ---- fusion benchmark ----------------------------------------------------

Outcome directional_fusion() {
  const auto t0 = Clock::now();
  const SolverConfig solver;
  const RewardWeights weights;
  const FeatureConfig features;
  const PipelineConfig pc;
  const int n = 200;
  std::vector<Episode> episodes;
  for (int e = 0; e < n; ++e) {
    ScenarioSpec spec;
    spec.seed = 5000 + static_cast<std::uint64_t>(e);
    spec.num_vehicles = 3;
    spec.cruisers = 2;
    episodes.push_back(generate_episode(spec, solver, weights));
  }
  const SplitIndices split = split_indices(n, 0.6, 42);
  TrainingSet set;
  for (std::size_t i : split.train) {
    const GroundTruth truth = episode_ground_truth(episodes[i]);
    for (const EgoPackage& pkg : episode_packages(episodes[i], pc.window_longitudinal, pc.window_lateral)) {
      if (episodes[i].levels.at(pkg.ego_id) >= 0) append_samples(set, pkg, truth, episodes[i].spec.road, features, 5);
    }
  }
  const MotionModel model = fit_motion_model(set, features, SvmHyperparams{});

  std::vector<PredictionRecord> records;
  TruthSet truths;
  const TrackerConfig tc{solver, weights, BeliefConfig{}, 1.0};
  for (std::size_t i : split.validation) {
    const std::string source = std::to_string(i);
    truths[source] = episode_ground_truth(episodes[i]);
    const VehicleId target = episodes[i].frames.front().target_id();
    for (const EgoPackage& pkg : episode_packages(episodes[i], pc.window_longitudinal, pc.window_lateral)) {
      if (pkg.ego_id != target) continue;
      PredictionSession session(tc, episodes[i].spec.road, {}, &model);
      for (const FramePrediction& p : predict_package(pkg, session, 2)) {
        PredictionRecord r = make_record(p);
        r.source = source;
        records.push_back(std::move(r));
      }
    }
  }
  const EvalReport report = evaluate_predictions(records, truths);
  const double elapsed = seconds_since(t0);
  const PredictorReport& motion = *report.motion;
  const double gain = report.fused.accuracy - motion.accuracy;
  const bool accuracy_ok = gain >= 0.05;
  const bool lead_ok = report.interaction.confidence_lead > motion.confidence_lead;
  return {accuracy_ok && lead_ok && elapsed < 900.0,
          fmt::format("accuracy motion {:.4f}, interaction {:.4f}, fused {:.4f} (gain {:+.1f} pp, need +5.0: {}); "
                      "60%-confidence lead interaction {:.1f} s vs motion {:.1f} s ({}); {} frames, {:.0f} s",
                      motion.accuracy, report.interaction.accuracy, report.fused.accuracy, 100.0 * gain,
                      accuracy_ok ? "met" : "not met", report.interaction.confidence_lead,
                      motion.confidence_lead, lead_ok ? "met" : "not met", report.frames, elapsed)};
}

// ---- determinism ---------------------------------------------------------

int cli(std::vector<std::string> args, std::string& out) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  out += o.str();
  return code;
}

Outcome determinism() {
  fixtures::TempDir dir;
  {
    AppConfig c;
    c.scenario.num_vehicles = 3;
    c.scenario.cruisers = 1;
    c.scenario.episode_length = 6.0;
    std::ofstream(dir / "config.json") << config_to_json(c).dump(2);
  }
  const std::string cfg = (dir / "config.json").string();
  const std::string csv = fixtures::data_path("ten_vehicles.csv").string();
  std::array<std::string, 2> stdout_text;
  bool codes_ok = true;
  for (int run = 0; run < 2; ++run) {
    const fs::path base = dir / ("run" + std::to_string(run));
    const std::string b = base.string();
    std::string& out = stdout_text[run];
    auto step = [&](std::vector<std::string> args) { codes_ok = codes_ok && cli(std::move(args), out) == 0; };
    step({"preprocess", csv, "--config", cfg, "--out", b + "/pre", "--trace", b + "/pre.trace.json"});
    step({"generate", "--config", cfg, "--seed", "9", "--episodes", "4", "--out", b + "/gen", "--trace",
          b + "/gen.trace.json"});
    step({"train", b + "/gen", "--config", cfg, "--seed", "9", "--out", b + "/model", "--trace",
          b + "/train.trace.json"});
    step({"predict", b + "/gen", "--config", cfg, "--model", b + "/model/model.json", "--split",
          b + "/model/split.json", "--beliefs", b + "/beliefs", "--out", b + "/pred.jsonl", "--trace",
          b + "/pred.trace.jsonl"});
    step({"predict", b + "/pre", "--config", cfg, "--out", b + "/pre_pred.jsonl"});
    step({"evaluate", b + "/pred.jsonl", b + "/gen", "--config", cfg, "--out", b + "/eval", "--trace",
          b + "/eval.trace.json"});
  }
  std::size_t files = 0;
  std::size_t differing = 0;
  const fs::path r0 = dir / "run0", r1 = dir / "run1";
  for (const auto& e : fs::recursive_directory_iterator(r0)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path rel = fs::relative(e.path(), r0);
    if (!fs::exists(r1 / rel) || slurp(e.path()) != slurp(r1 / rel)) ++differing;
  }
  const bool pass = codes_ok && files > 0 && differing == 0 && stdout_text[0] == stdout_text[1];
  return {pass, fmt::format("{} output files compared across two runs of every command, {} differ{}", files,
                            differing, codes_ok ? "" : "; a command failed")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"level-k fixed point", level_k_fixed_point},
      {"cut-in reproduction", cut_in_reproduction},
      {"belief convergence", belief_convergence},
      {"reward identities", reward_identities},
      {"filter correctness", filter_correctness},
      {"pipeline conservation", pipeline_conservation},
      {"directional fusion", directional_fusion},
      {"determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
