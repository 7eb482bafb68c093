#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <levelk/config.hpp>
#include <levelk/evaluation.hpp>
#include <levelk/pipeline.hpp>
#include <levelk/serialization.hpp>

#include "fixtures.hpp"
#include "levelk_cli/commands.hpp"

using namespace levelk;
using fixtures::data_path;
using fixtures::read_file;
using fixtures::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Short episodes and a shallow search keep the end-to-end runs quick.
fs::path fast_config(const TempDir& dir) {
  AppConfig c;
  c.solver.max_sequence_depth = 2;
  c.scenario.num_vehicles = 2;
  c.scenario.cruisers = 1;
  c.scenario.episode_length = 4.0;
  c.predict_stride = 5;
  const fs::path path = dir / "config.json";
  write_json_file(config_to_json(c), path);
  return path;
}

void expect_same_tree(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
  }
  ASSERT_FALSE(files.empty());
  for (const fs::path& f : files) {
    ASSERT_TRUE(fs::exists(b / f)) << f;
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
  }
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"preprocess", data_path("two_vehicles.csv").string()}).code, cli::kUsage);
  EXPECT_EQ(run({"generate", "--out", "x", "--episodes", "many"}).code, cli::kUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST(Cli, PreprocessTwoVehicles) {
  TempDir dir;
  const Result r = run({"preprocess", data_path("two_vehicles.csv").string(), "--out",
                        (dir / "pkgs").string(), "--trace", (dir / "trace.json").string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("2 packages"), std::string::npos);
  const Manifest m = read_manifest(dir / "pkgs");
  ASSERT_EQ(m.packages.size(), 2u);
  EXPECT_EQ(m.packages[0].frames, 30u);
  EXPECT_TRUE(fs::exists(dir / "pkgs" / "labels.json"));
  const auto trace = read_json_file(dir / "trace.json");
  EXPECT_EQ(trace.at("command"), "preprocess");
}

TEST(Cli, PreprocessMissingLaneColumn) {
  TempDir dir;
  const Result r = run({"preprocess", data_path("missing_lane_id.csv").string(), "--out",
                        (dir / "pkgs").string()});
  EXPECT_EQ(r.code, cli::kSchemaFailure);
  EXPECT_NE(r.err.find("Lane_ID"), std::string::npos);
}

TEST(Cli, PreprocessEmptyInput) {
  TempDir dir;
  const Result r = run({"preprocess", data_path("empty.csv").string(), "--out", (dir / "pkgs").string()});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("0 packages"), std::string::npos);
  EXPECT_TRUE(read_manifest(dir / "pkgs").packages.empty());
}

TEST(Cli, ConfigErrors) {
  TempDir dir;
  {
    std::ofstream(dir / "bad.json") << R"({"solver": {"depth": 4}})";
  }
  const Result r = run({"generate", "--config", (dir / "bad.json").string(), "--out",
                        (dir / "g").string()});
  EXPECT_EQ(r.code, cli::kConfigFailure);
  EXPECT_NE(r.err.find("solver.depth"), std::string::npos);
  EXPECT_EQ(run({"generate", "--config", (dir / "none.json").string(), "--out", (dir / "g").string()}).code,
            cli::kUsage);
}

TEST(Cli, MissingInputIsIoFailure) {
  TempDir dir;
  EXPECT_EQ(run({"preprocess", (dir / "absent.csv").string(), "--out", (dir / "p").string()}).code,
            cli::kIoFailure);
}

TEST(Cli, EndToEnd) {
  TempDir dir;
  const std::string cfg = fast_config(dir).string();
  const std::string data = (dir / "data").string();
  Result r = run({"generate", "--config", cfg, "--seed", "3", "--episodes", "3", "--out", data});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "data" / "index.json"));

  const std::string model = (dir / "model").string();
  r = run({"train", data, "--config", cfg, "--out", model});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "model" / "model.json"));
  EXPECT_TRUE(fs::exists(dir / "model" / "split.json"));

  const std::string preds = (dir / "preds.jsonl").string();
  r = run({"predict", data, "--config", cfg, "--model", model + "/model.json", "--split",
           model + "/split.json", "--out", preds, "--trace", (dir / "trace.jsonl").string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  std::ifstream in(preds);
  const auto records = read_records(in);
  ASSERT_FALSE(records.empty());
  for (const auto& rec : records) {
    EXPECT_TRUE(rec.motion.has_value());
    EXPECT_FALSE(rec.source.empty());
  }

  r = run({"evaluate", preds, data, "--config", cfg, "--out", (dir / "eval").string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("interaction"), std::string::npos);
  for (const char* f : {"report.json", "report.txt", "horizon.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "eval" / f)) << f;
  }
}

TEST(Cli, EvaluateWithoutLabelsIsContractFailure) {
  TempDir dir;
  const std::string cfg = fast_config(dir).string();
  ASSERT_EQ(run({"generate", "--config", cfg, "--out", (dir / "a").string()}).code, cli::kOk);
  const std::string preds = (dir / "p.jsonl").string();
  ASSERT_EQ(run({"predict", (dir / "a").string(), "--config", cfg, "--out", preds}).code, cli::kOk);
  write_ground_truth(GroundTruth{}, dir / "none.json");
  const Result r = run({"evaluate", preds, (dir / "none.json").string()});
  EXPECT_EQ(r.code, cli::kContractFailure);
  EXPECT_NE(r.err.find("without ground truth"), std::string::npos);
}

TEST(Cli, CorruptBeliefFileWarnsAndStartsUniform) {
  TempDir dir;
  const std::string cfg = fast_config(dir).string();
  ASSERT_EQ(run({"generate", "--config", cfg, "--out", (dir / "g").string()}).code, cli::kOk);
  const Manifest m = read_manifest(dir / "g");
  const std::string pkg = (dir / "g" / m.packages.front().file).string();
  {
    std::ofstream(dir / "b.json") << "{\"2\": [0.5,";
  }
  const Result r = run({"predict", pkg, "--config", cfg, "--beliefs", (dir / "b.json").string(),
                        "--out", (dir / "p.jsonl").string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  std::ifstream in(dir / "p.jsonl");
  const auto records = read_records(in);
  ASSERT_FALSE(records.empty());
  for (const auto& [id, b] : records.front().beliefs) {
    for (double p : b.p) EXPECT_DOUBLE_EQ(p, 1.0 / 3.0);
  }
  // The rewritten state file is valid and is picked up on the next run.
  const BeliefMap saved = beliefs_from_json(read_json_file(dir / "b.json"));
  const Result again = run({"predict", pkg, "--config", cfg, "--beliefs", (dir / "b.json").string(),
                            "--out", (dir / "q.jsonl").string()});
  ASSERT_EQ(again.code, cli::kOk);
  EXPECT_TRUE(again.err.empty()) << again.err;
  std::ifstream in2(dir / "q.jsonl");
  const auto second = read_records(in2);
  for (const auto& [id, b] : second.front().beliefs) {
    if (saved.contains(id)) EXPECT_EQ(b.p, saved.at(id).p);
  }
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  TempDir dir;
  const std::string cfg = fast_config(dir).string();
  for (const char* run_dir : {"r1", "r2"}) {
    const fs::path base = dir / run_dir;
    ASSERT_EQ(run({"preprocess", data_path("ten_vehicles.csv").string(), "--config", cfg, "--out",
                   (base / "pre").string()}).code, cli::kOk);
    ASSERT_EQ(run({"generate", "--config", cfg, "--episodes", "2", "--out", (base / "gen").string()}).code,
              cli::kOk);
    ASSERT_EQ(run({"train", (base / "gen").string(), "--config", cfg, "--out", (base / "model").string()}).code,
              cli::kOk);
    ASSERT_EQ(run({"predict", (base / "gen").string(), "--config", cfg, "--model",
                   (base / "model" / "model.json").string(), "--out", (base / "p.jsonl").string()}).code,
              cli::kOk);
    ASSERT_EQ(run({"evaluate", (base / "p.jsonl").string(), (base / "gen").string(), "--config", cfg,
                   "--out", (base / "eval").string()}).code, cli::kOk);
  }
  expect_same_tree(dir / "r1", dir / "r2");
}
