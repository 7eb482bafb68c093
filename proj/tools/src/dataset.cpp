#include "levelk_cli/dataset.hpp"

#include <levelk/error.hpp>
#include <levelk/scenario.hpp>
#include <levelk/serialization.hpp>

namespace levelk::cli {
namespace fs = std::filesystem;

bool is_collection(const fs::path& root) { return fs::exists(root / "index.json"); }

void write_collection_index(const fs::path& root, const std::vector<std::string>& datasets) {
  write_json_file(Json{{"kind", "collection"}, {"datasets", datasets}}, root / "index.json");
}

namespace {

DatasetPart load_part(const fs::path& dir, std::string source, const AppConfig& config) {
  DatasetPart part;
  part.source = std::move(source);
  part.dir = dir;
  part.manifest = read_manifest(dir);
  part.truth = read_ground_truth(dir / "labels.json");
  part.road = config.pipeline.road;
  if (fs::exists(dir / "scenario.json")) {
    const Json j = read_json_file(dir / "scenario.json");
    if (!j.contains("scenario")) throw SchemaError((dir / "scenario.json").string() + ": no scenario");
    part.road = scenario_from_json(j.at("scenario")).road;
  }
  return part;
}

}  // namespace

std::vector<DatasetPart> load_dataset(const fs::path& root, const AppConfig& config) {
  if (!fs::is_directory(root)) throw IoError("not a dataset directory: " + root.string());
  if (!is_collection(root)) return {load_part(root, "", config)};
  const Json index = read_json_file(root / "index.json");
  std::vector<DatasetPart> parts;
  try {
    for (const Json& name : index.at("datasets")) {
      const std::string s = name.get<std::string>();
      parts.push_back(load_part(root / s, s, config));
    }
  } catch (const Json::exception& e) {
    throw SchemaError((root / "index.json").string() + ": " + e.what());
  }
  return parts;
}

std::string package_key(const DatasetPart& part, const ManifestEntry& entry) {
  return part.source.empty() ? entry.file : part.source + "/" + entry.file;
}

}  // namespace levelk::cli
