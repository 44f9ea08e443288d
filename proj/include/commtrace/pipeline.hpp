#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "commtrace/events.hpp"
#include "commtrace/lifecycle.hpp"
#include "commtrace/track.hpp"

namespace commtrace {

inline constexpr int kConfigSchemaVersion = 1;

enum class Weighting { raw, cocit };
enum class Detector { builtin, imported };

enum class Stage { build, detect, track, topics, measures, events, layout, diagram };

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);
const std::vector<Stage>& all_stages();

struct WindowParams {
  std::optional<int> first_year;  // defaults to the corpus year range
  std::optional<int> last_year;
  int length = 3;
  int stride = 1;
  bool include_short = false;
};

struct DiagramConfig {
  std::string name = "overview";
  std::vector<CommunityRef> focus;  // empty: every community in range
  double min_fraction = 0.0;
  std::optional<std::size_t> first_window;
  std::optional<std::size_t> last_window;
};

struct PipelineConfig {
  std::filesystem::path citations;
  std::filesystem::path docs;
  std::filesystem::path keywords;
  std::filesystem::path partitions_dir;
  WindowParams windows;
  std::optional<Weighting> weighting;  // unset: raw for builtin, cocit for imported
  Detector detector = Detector::builtin;
  double resolution = 1.0;
  EventThresholds thresholds;
  CampConfig camps = CampConfig::defaults();
  std::size_t top_k = 20;
  std::uint64_t seed = 1;
  LineageOptions tracking;
  PathLength betweenness = PathLength::inverse_weight;
  DensityMode density = DensityMode::edge_set;
  int layout_iterations = 200;
  std::vector<DiagramConfig> diagrams;
  std::filesystem::path output_dir = "out";
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Carries every problem found, not just the first.
struct ConfigError : InvalidConfig {
  explicit ConfigError(std::vector<std::string> problems);
  std::vector<std::string> errors;
};

Weighting effective_weighting(const PipelineConfig& config);

/// Relative paths resolve against `base_dir`. Unknown keys are rejected.
PipelineConfig parse_config(const nlohmann::json& document, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form, as echoed into the manifest.
nlohmann::ordered_json config_to_json(const PipelineConfig& config);

/// Problems that stop `stage` from running (bad values, missing inputs).
std::vector<std::string> validate_config(const PipelineConfig& config, Stage stage);

struct RunReport {
  bool ok = true;
  std::vector<std::string> errors;
  nlohmann::ordered_json manifest;
};

/// Runs one stage against the output directory. Stages after `build` read
/// the files of their predecessors. Updates manifest.json either way.
RunReport run_stage(const PipelineConfig& config, Stage stage);

/// All stages in order with a fresh manifest.
RunReport run_pipeline(const PipelineConfig& config);

// Output layout below `output_dir`.
std::filesystem::path window_dir(const std::filesystem::path& out, std::size_t window);
inline constexpr const char* kManifestFile = "manifest.json";

}  // namespace commtrace
