#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "bevreg/association.hpp"
#include "bevreg/metrics.hpp"
#include "bevreg/observation.hpp"
#include "bevreg/registration.hpp"
#include "bevreg/simulator.hpp"

namespace bevreg::io {

using Json = nlohmann::ordered_json;

// Scene file: {"spec", "subjects": [{"id", "x", "y", "theta"}],
//              "cameras": [{"view_id", "wearer_id", "x", "y", "theta"}]}
Json scene_to_json(const SceneSpec& spec, const SceneGroundTruth& gt);
SceneGroundTruth scene_from_json(const Json& j, SceneSpec* spec_out = nullptr);

// Scene spec as stored in scene files and the "scene" section of run
// configs. Angles are written in degrees under *_deg keys. Unknown keys
// throw ConfigError; absent keys keep their defaults.
Json scene_spec_to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(const Json& j);

// Observation file: {"view_id", "detections": [{"id", "x", "y", "theta"}]}
// "id" is null for detections without identity.
Json observation_to_json(const ViewObservation& obs);
ViewObservation observation_from_json(const Json& j);

// Similarity file: {"row_view", "col_view", "values": [[...], ...]}
Json similarity_to_json(const SimilarityMatrix& m);
SimilarityMatrix similarity_from_json(const Json& j);

Json registered_scene_to_json(const std::string& scene_id, const RegisteredScene& scene, SelectionStrategy strategy);
RegisteredScene registered_scene_from_json(const Json& j);

Json report_to_json(const MetricsReport& report);

// Stable CSV layout for metric reports.
const std::vector<std::string>& report_csv_columns();
std::string report_csv_row(const std::string& scene_id, const MetricsReport& report);

std::string format_double(double v);

// Throw IoError when the file cannot be opened, ContractError on malformed JSON.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Throws IoError unless `dir` exists and is a directory.
void require_directory(const std::filesystem::path& dir);

std::string observation_file_name(ViewId view);
std::string similarity_file_name(ViewId rows, ViewId cols);
std::string pseudo_label_file_name(ViewId rows, ViewId cols);
inline constexpr const char* kSceneFile = "scene.json";
inline constexpr const char* kRegisteredFile = "registered.json";

}  // namespace bevreg::io
