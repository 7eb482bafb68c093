#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <levelk/config.hpp>
#include <levelk/pipeline.hpp>

namespace levelk::cli {

/// One directory written by `preprocess` or by a single-episode `generate`.
struct DatasetPart {
  std::string source;  // name within a collection, empty for a lone dataset
  std::filesystem::path dir;
  Manifest manifest;
  GroundTruth truth;
  RoadGeometry road;
};

/// Loads a dataset directory (manifest.json) or a collection (index.json
/// listing dataset directories). The road comes from scenario.json when
/// present, otherwise from the pipeline configuration.
std::vector<DatasetPart> load_dataset(const std::filesystem::path& root, const AppConfig& config);

bool is_collection(const std::filesystem::path& root);
void write_collection_index(const std::filesystem::path& root,
                            const std::vector<std::string>& datasets);

/// Identifier of one package inside a dataset: "<source>/<file>" or "<file>".
std::string package_key(const DatasetPart& part, const ManifestEntry& entry);

}  // namespace levelk::cli
