#include "levelk_cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <levelk/config.hpp>
#include <levelk/evaluation.hpp>
#include <levelk/scenario.hpp>
#include <levelk/serialization.hpp>
#include <levelk/tracker.hpp>
#include <levelk/training.hpp>

#include "levelk_cli/dataset.hpp"

namespace levelk::cli {
namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSchema: return kSchemaFailure;
    case ErrorKind::kConfiguration: return kConfigFailure;
    case ErrorKind::kContractViolation: return kContractFailure;
    case ErrorKind::kIo: return kIoFailure;
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kNotFound:
    case ErrorKind::kInfeasibleManeuver: return kArgumentFailure;
  }
  return kFailure;
}

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string trace;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

AppConfig load(const Common& c) {
  AppConfig cfg = c.config.empty() ? AppConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f = open_out(path);
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

void write_trace(const Common& c, const Json& trace) {
  if (!c.trace.empty()) write_json_file(trace, c.trace);
}

// ---- preprocess ----------------------------------------------------------

struct PreprocessArgs {
  std::string input;
};

int preprocess(const Common& c, const PreprocessArgs& a, Streams io) {
  const AppConfig cfg = load(c);
  std::ifstream in(a.input, std::ios::binary);
  if (!in) throw IoError("cannot open " + a.input);
  const Manifest manifest = run_pipeline(in, c.out, cfg.pipeline);
  io.out << fmt::format("{} packages, {} frames\n", manifest.packages.size(),
                        manifest.total_frames());
  Json packages = Json::array();
  for (const ManifestEntry& e : manifest.packages) {
    packages.push_back({{"ego_id", e.ego_id}, {"frames", e.frames}});
  }
  write_trace(c, {{"command", "preprocess"}, {"config", config_to_json(cfg)}, {"packages", packages}});
  return kOk;
}

// ---- generate ------------------------------------------------------------

struct GenerateArgs {
  std::string scenario;
  std::optional<int> episodes;
};

int generate(const Common& c, const GenerateArgs& a, Streams io) {
  AppConfig cfg = load(c);
  if (!a.scenario.empty()) {
    try {
      cfg.scenario = scenario_from_json(read_json_file(a.scenario));
    } catch (const SchemaError& e) {
      throw ConfigError(e.what());
    }
  }
  if (a.episodes) cfg.episodes = *a.episodes;
  if (cfg.episodes < 1) throw ConfigError("episodes must be at least 1");
  if (c.seed) cfg.scenario.seed = *c.seed;

  const fs::path root = c.out;
  ensure_dir(root);
  std::vector<std::string> names;
  Json trace = Json::array();
  for (int e = 0; e < cfg.episodes; ++e) {
    ScenarioSpec spec = cfg.scenario;
    spec.seed = cfg.scenario.seed + static_cast<std::uint64_t>(e);
    const Episode ep = generate_episode(spec, cfg.solver, cfg.weights, cfg.car_following);
    const std::string name = cfg.episodes == 1 ? "" : fmt::format("episode_{:04d}", e);
    const fs::path dir = name.empty() ? root : root / name;
    write_episode(ep, dir, cfg.pipeline.window_longitudinal, cfg.pipeline.window_lateral);
    if (!name.empty()) names.push_back(name);
    Json levels = Json::object();
    for (const auto& [id, k] : ep.levels) levels[std::to_string(id)] = k;
    trace.push_back({{"seed", spec.seed}, {"levels", levels}, {"segments", ep.segments.size()}});
  }
  if (!names.empty()) write_collection_index(root, names);
  io.out << fmt::format("{} episode(s) written\n", cfg.episodes);
  write_trace(c, {{"command", "generate"}, {"config", config_to_json(cfg)}, {"episodes", trace}});
  return kOk;
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::optional<double> split;
};

struct Unit {
  const DatasetPart* part;
  std::vector<const ManifestEntry*> entries;
  std::vector<std::string> keys;
};

// Splitting happens per dataset in a collection (episodes stay whole) and
// per package otherwise.
std::vector<Unit> split_units(const std::vector<DatasetPart>& parts) {
  std::vector<Unit> units;
  if (parts.size() == 1 && parts.front().source.empty()) {
    for (const ManifestEntry& e : parts.front().manifest.packages) {
      units.push_back({&parts.front(), {&e}, {package_key(parts.front(), e)}});
    }
    return units;
  }
  for (const DatasetPart& p : parts) {
    Unit u{&p, {}, {}};
    for (const ManifestEntry& e : p.manifest.packages) {
      u.entries.push_back(&e);
      u.keys.push_back(package_key(p, e));
    }
    units.push_back(std::move(u));
  }
  return units;
}

int train(const Common& c, const TrainArgs& a, Streams io) {
  AppConfig cfg = load(c);
  if (a.split) cfg.train_split = *a.split;
  cfg.validate();
  const std::vector<DatasetPart> parts = load_dataset(a.data, cfg);
  const std::vector<Unit> units = split_units(parts);
  if (units.size() < 2) throw InvalidArgument("training needs at least two packages or episodes");
  const SplitIndices split = split_indices(units.size(), cfg.train_split, cfg.seed);

  TrainingSet set;
  Json train_keys = Json::array();
  Json validation_keys = Json::array();
  for (std::size_t u : split.train) {
    const Unit& unit = units[u];
    for (std::size_t i = 0; i < unit.entries.size(); ++i) {
      const EgoPackage pkg = read_package_file(unit.part->dir / unit.entries[i]->file);
      append_samples(set, pkg, unit.part->truth, unit.part->road, cfg.features,
                     cfg.train_frame_spacing);
      train_keys.push_back(unit.keys[i]);
    }
  }
  for (std::size_t u : split.validation) {
    for (const std::string& k : units[u].keys) validation_keys.push_back(k);
  }
  if (set.features.size() < 2) throw InvalidArgument("training split yields fewer than two samples");

  TrainingDiagnostics diag;
  const MotionModel model = fit_motion_model(set, cfg.features, cfg.svm, &diag);
  const fs::path out = c.out;
  ensure_dir(out);
  write_json_file(model_to_json(model), out / "model.json");
  write_json_file({{"seed", cfg.seed},
                   {"train_fraction", cfg.train_split},
                   {"train", train_keys},
                   {"validation", validation_keys}},
                  out / "split.json");
  Json counts = Json::object();
  for (ManeuverType m : kAllManeuvers) counts[std::string(to_string(m))] = diag.class_counts[index_of(m)];
  Json final_loss = Json::array();
  for (const auto& h : diag.loss_history) final_loss.push_back(h.empty() ? 0.0 : h.back());
  const Json summary{{"samples", set.features.size()},
                     {"training_accuracy", diag.training_accuracy},
                     {"class_counts", counts},
                     {"final_loss", final_loss}};
  write_json_file(summary, out / "training.json");
  io.out << fmt::format("trained on {} samples, training accuracy {:.4f}\n", set.features.size(),
                        diag.training_accuracy);
  Json losses = Json::array();
  for (const auto& h : diag.loss_history) losses.push_back(h);
  write_trace(c, {{"command", "train"},
                  {"config", config_to_json(cfg)},
                  {"summary", summary},
                  {"loss_history", losses}});
  return kOk;
}

// ---- predict -------------------------------------------------------------

struct PredictArgs {
  std::string data;
  std::string model;
  std::string split;
  std::string beliefs;
  std::optional<int> stride;
};

struct Job {
  std::string source;
  std::string key;
  EgoPackage package;
  RoadGeometry road;
};

std::vector<Job> prediction_jobs(const PredictArgs& a, const AppConfig& cfg) {
  const fs::path data = a.data;
  std::vector<Job> jobs;
  if (fs::is_directory(data)) {
    std::optional<std::vector<std::string>> keep;
    if (!a.split.empty()) {
      const Json s = read_json_file(a.split);
      try {
        keep = s.at("validation").get<std::vector<std::string>>();
      } catch (const Json::exception& e) {
        throw SchemaError(a.split + ": " + e.what());
      }
    }
    for (const DatasetPart& part : load_dataset(data, cfg)) {
      for (const ManifestEntry& e : part.manifest.packages) {
        const std::string key = package_key(part, e);
        if (keep && std::find(keep->begin(), keep->end(), key) == keep->end()) continue;
        jobs.push_back({part.source, key, read_package_file(part.dir / e.file), part.road});
      }
    }
    return jobs;
  }
  if (!fs::exists(data)) throw IoError("no such input: " + data.string());
  if (data.extension() == ".json") {
    // A scenario: simulate it and predict its target vehicle.
    ScenarioSpec spec;
    try {
      spec = scenario_from_json(read_json_file(data));
    } catch (const SchemaError& e) {
      throw ConfigError(e.what());
    }
    if (spec.initial.empty() && spec.seed == ScenarioSpec{}.seed && cfg.seed != 1) spec.seed = cfg.seed;
    const Episode ep = generate_episode(spec, cfg.solver, cfg.weights, cfg.car_following);
    const VehicleId target = ep.frames.front().target_id();
    for (EgoPackage& pkg : episode_packages(ep, cfg.pipeline.window_longitudinal,
                                            cfg.pipeline.window_lateral)) {
      if (pkg.ego_id == target) jobs.push_back({"", data.filename().string(), std::move(pkg), spec.road});
    }
    return jobs;
  }
  RoadGeometry road = cfg.pipeline.road;
  const fs::path scenario = data.parent_path() / "scenario.json";
  if (fs::exists(scenario)) road = scenario_from_json(read_json_file(scenario).at("scenario")).road;
  jobs.push_back({"", data.filename().string(), read_package_file(data), road});
  return jobs;
}

// Empty map (with a warning) when the file is unreadable or malformed.
BeliefMap load_beliefs(const fs::path& path, std::ostream& err) {
  if (!fs::exists(path)) return {};
  try {
    BeliefMap b = beliefs_from_json(read_json_file(path));
    for (const auto& [id, belief] : b) belief.validate();
    return b;
  } catch (const Error& e) {
    err << "warning: ignoring belief state " << path.string() << " (" << e.what()
        << "); starting from the initial belief\n";
    return {};
  }
}

Json trace_frame(const Job& job, const FramePrediction& p) {
  Json levels = Json::object();
  for (const auto& [id, table] : p.detail.levels) {
    Json per_level = Json::array();
    for (const Policy& policy : table) per_level.push_back(policy.skeleton());
    levels[std::to_string(id)] = per_level;
  }
  Json candidates = Json::array();
  for (const auto& cand : p.detail.candidates) {
    candidates.push_back({{"policy", cand.skeleton}, {"value", cand.value}});
  }
  return {{"source", job.source},         {"ego", p.ego},
          {"frame", p.frame},             {"policy", p.detail.policy.skeleton()},
          {"value", p.detail.value},      {"levels", levels},
          {"candidates", candidates},     {"beliefs", beliefs_to_json(p.beliefs)}};
}

struct JobOutput {
  std::string records;
  std::string trace;
  std::string warnings;
  std::size_t frames = 0;
  std::exception_ptr error;
};

// Calls fn(i) once for every i in [0, n) on up to hardware_concurrency threads.
template <class Fn>
void parallel_for(std::size_t n, Fn fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

int predict(const Common& c, const PredictArgs& a, Streams io) {
  AppConfig cfg = load(c);
  if (a.stride) cfg.predict_stride = *a.stride;
  cfg.validate();
  std::optional<MotionModel> model;
  if (!a.model.empty()) model = model_from_json(read_json_file(a.model));

  const std::vector<Job> jobs = prediction_jobs(a, cfg);
  const bool single = jobs.size() == 1;
  if (!a.beliefs.empty() && !single) ensure_dir(a.beliefs);
  auto belief_path = [&](const Job& job) -> fs::path {
    if (single) return a.beliefs;
    std::string name = job.key;
    std::replace(name.begin(), name.end(), '/', '_');
    return fs::path(a.beliefs) / (name + ".beliefs.json");
  };

  // Packages are independent; outputs are merged in job order.
  std::vector<JobOutput> outputs(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const Job& job = jobs[i];
    JobOutput& o = outputs[i];
    try {
      std::ostringstream records, trace, warnings;
      BeliefMap initial;
      if (!a.beliefs.empty()) initial = load_beliefs(belief_path(job), warnings);
      PredictionSession session(cfg.tracker(), job.road, initial, model ? &*model : nullptr);
      for (const FramePrediction& p : predict_package(job.package, session, cfg.predict_stride)) {
        PredictionRecord r = make_record(p);
        r.source = job.source;
        records << record_to_json(r).dump() << '\n';
        if (!c.trace.empty()) trace << trace_frame(job, p).dump() << '\n';
        ++o.frames;
      }
      if (!a.beliefs.empty()) write_json_file(beliefs_to_json(session.beliefs()), belief_path(job));
      o.records = records.str();
      o.trace = trace.str();
      o.warnings = warnings.str();
    } catch (...) {
      o.error = std::current_exception();
    }
  });

  std::string records;
  std::string trace;
  std::size_t frames = 0;
  for (const JobOutput& o : outputs) {
    io.err << o.warnings;
    if (o.error) std::rethrow_exception(o.error);
    records += o.records;
    trace += o.trace;
    frames += o.frames;
  }
  if (c.out.empty()) {
    io.out << records;
  } else {
    write_text(c.out, records);
    io.out << fmt::format("{} predictions for {} package(s)\n", frames, jobs.size());
  }
  if (!c.trace.empty()) write_text(c.trace, trace);
  return kOk;
}

// ---- evaluate ------------------------------------------------------------

struct EvaluateArgs {
  std::string predictions;
  std::string truth;
};

int evaluate(const Common& c, const EvaluateArgs& a, Streams io) {
  const AppConfig cfg = load(c);
  std::ifstream in(a.predictions, std::ios::binary);
  if (!in) throw IoError("cannot open " + a.predictions);
  const std::vector<PredictionRecord> records = read_records(in);

  TruthSet truths;
  const fs::path truth_path = a.truth;
  if (fs::is_directory(truth_path)) {
    for (DatasetPart& part : load_dataset(truth_path, cfg)) truths.emplace(part.source, std::move(part.truth));
  } else {
    truths.emplace("", read_ground_truth(truth_path));
  }
  const EvalReport report = evaluate_predictions(records, truths, cfg.evaluation);
  const std::string table = report_table(report);
  if (!c.out.empty()) {
    const fs::path out = c.out;
    ensure_dir(out);
    write_json_file(report_to_json(report), out / "report.json");
    write_text(out / "report.txt", table);
    write_text(out / "horizon.csv", horizon_csv(report));
  }
  io.out << table;
  write_trace(c, {{"command", "evaluate"},
                  {"config", config_to_json(cfg)},
                  {"records", records.size()},
                  {"datasets", truths.size()}});
  return kOk;
}

void add_common(CLI::App* cmd, Common& c, bool out_required) {
  cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Random seed override");
  auto* out = cmd->add_option("--out", c.out, "Output path");
  if (out_required) out->required();
  cmd->add_option("--trace", c.trace, "Write a JSON trace of the run to this file");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interaction-aware maneuver prediction with level-k reasoning", "levelk"};
  app.require_subcommand(1);

  Common common;
  PreprocessArgs pre;
  GenerateArgs gen;
  TrainArgs tr;
  PredictArgs pr;
  EvaluateArgs ev;

  auto* cmd_pre = app.add_subcommand("preprocess", "Convert a trajectory CSV into ego packages");
  add_common(cmd_pre, common, true);
  cmd_pre->add_option("input", pre.input, "Trajectory CSV")->required();

  auto* cmd_gen = app.add_subcommand("generate", "Simulate level-k agents into a labeled dataset");
  add_common(cmd_gen, common, true);
  cmd_gen->add_option("--scenario", gen.scenario, "Scenario JSON")->check(CLI::ExistingFile);
  cmd_gen->add_option("--episodes", gen.episodes, "Number of episodes");

  auto* cmd_train = app.add_subcommand("train", "Train the motion classifier");
  add_common(cmd_train, common, true);
  cmd_train->add_option("data", tr.data, "Dataset or collection directory")->required();
  cmd_train->add_option("--split", tr.split, "Training fraction");

  auto* cmd_pred = app.add_subcommand("predict", "Per-frame maneuver predictions");
  add_common(cmd_pred, common, false);
  cmd_pred->add_option("data", pr.data, "Package file, dataset directory or scenario JSON")->required();
  cmd_pred->add_option("--model", pr.model, "Motion model JSON")->check(CLI::ExistingFile);
  cmd_pred->add_option("--split", pr.split, "Only the validation packages of this split file")
      ->check(CLI::ExistingFile);
  cmd_pred->add_option("--beliefs", pr.beliefs, "Belief state file (directory for several packages)");
  cmd_pred->add_option("--stride", pr.stride, "Predict every n-th frame");

  auto* cmd_eval = app.add_subcommand("evaluate", "Score predictions against ground truth");
  add_common(cmd_eval, common, false);
  cmd_eval->add_option("predictions", ev.predictions, "Prediction JSONL")->required();
  cmd_eval->add_option("truth", ev.truth, "labels.json, dataset or collection directory")->required();

  std::vector<std::string> argv_store{"levelk"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& s : argv_store) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const Streams io{out, err};
  try {
    if (*cmd_pre) return preprocess(common, pre, io);
    if (*cmd_gen) return generate(common, gen, io);
    if (*cmd_train) return train(common, tr, io);
    if (*cmd_pred) return predict(common, pr, io);
    if (*cmd_eval) return evaluate(common, ev, io);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace levelk::cli
