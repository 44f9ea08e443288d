// commtrace: dynamic co-citation community analysis from the command line.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "commtrace/pipeline.hpp"

namespace {

struct Overrides {
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> import_dir;
  std::optional<std::string> weighting;
  std::optional<double> theta_s;
  std::optional<double> theta_sm;
  std::optional<double> theta_c;
  std::optional<std::size_t> min_overlap;
  std::vector<std::string> focus;
  std::optional<double> min_fraction;
  std::optional<std::size_t> first_window;
  std::optional<std::size_t> last_window;
  std::string diagram_name = "focus";
};

void configure_logging() {
  spdlog::set_level(spdlog::level::warn);
  const char* level = std::getenv("COMMTRACE_LOG");
  if (level == nullptr) return;
  const std::string name(level);
  if (name == "error" || name == "warn" || name == "info" || name == "debug") {
    spdlog::set_level(spdlog::level::from_str(name));
  } else {
    spdlog::warn("ignoring COMMTRACE_LOG={} (expected error, warn, info or debug)", name);
  }
}

int report_errors(const std::vector<std::string>& errors, int code) {
  std::cerr << nlohmann::json{{"errors", errors}}.dump(2) << '\n';
  return code;
}

void apply(commtrace::PipelineConfig& config, const Overrides& o) {
  using namespace commtrace;
  if (o.threads) config.threads = *o.threads;
  if (o.seed) config.seed = *o.seed;
  if (o.out) config.output_dir = *o.out;
  if (o.import_dir) {
    config.detector = Detector::imported;
    config.partitions_dir = *o.import_dir;
  }
  if (o.weighting) config.weighting = *o.weighting == "raw" ? Weighting::raw : Weighting::cocit;
  if (o.theta_s) config.thresholds.shift = *o.theta_s;
  if (o.theta_sm) config.thresholds.shift_merge = *o.theta_sm;
  if (o.theta_c) config.thresholds.topic_change = *o.theta_c;
  if (o.min_overlap) config.thresholds.min_overlap = *o.min_overlap;
  if (!o.focus.empty() || o.min_fraction || o.first_window || o.last_window) {
    DiagramConfig d;
    d.name = o.diagram_name;
    for (const auto& f : o.focus) d.focus.push_back(parse_community_ref(f));
    d.min_fraction = o.min_fraction.value_or(0.0);
    d.first_window = o.first_window;
    d.last_window = o.last_window;
    config.diagrams = {d};
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Dynamic co-citation community analysis"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  Overrides o;
  app.add_option("--config", config_path, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--threads", o.threads, "cap on worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "override the config seed");
  app.add_option("--out", o.out, "override the output directory");

  std::vector<std::pair<CLI::App*, std::optional<commtrace::Stage>>> commands;
  for (auto stage : commtrace::all_stages()) {
    commands.emplace_back(app.add_subcommand(std::string(commtrace::to_string(stage))), stage);
  }
  commands.emplace_back(app.add_subcommand("run", "all stages in order"), std::nullopt);

  for (auto& [cmd, stage] : commands) {
    if (!stage || *stage == commtrace::Stage::build) {
      cmd->add_option("--weighting", o.weighting, "raw | cocit")->check(CLI::IsMember({"raw", "cocit"}));
    }
    if (!stage || *stage == commtrace::Stage::detect) {
      cmd->add_option("--import", o.import_dir, "read w<idx>.tsv partitions from this directory");
    }
    if (!stage || *stage == commtrace::Stage::events) {
      cmd->add_option("--theta-s", o.theta_s, "shift threshold")->check(CLI::Range(0.0, 1.0));
      cmd->add_option("--theta-sm", o.theta_sm, "shift/merge threshold")->check(CLI::Range(0.0, 1.0));
      cmd->add_option("--theta-c", o.theta_c, "topic change threshold")->check(CLI::Range(0.0, 1.0));
      cmd->add_option("--min-overlap", o.min_overlap, "minimum shared authors")->check(CLI::PositiveNumber);
    }
    if (!stage || *stage == commtrace::Stage::diagram) {
      cmd->add_option("--focus", o.focus, "focus community, e.g. w3:c15 (repeatable)");
      cmd->add_option("--min-fraction", o.min_fraction, "hide edges below this fraction")->check(CLI::Range(0.0, 1.0));
      cmd->add_option("--first-window", o.first_window, "first window index shown");
      cmd->add_option("--last-window", o.last_window, "last window index shown");
      cmd->add_option("--name", o.diagram_name, "diagram file stem when overriding the config")->capture_default_str();
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  commtrace::PipelineConfig config;
  try {
    config = commtrace::load_config(config_path);
    apply(config, o);
  } catch (const commtrace::ConfigError& e) {
    return report_errors(e.errors, 2);
  } catch (const std::exception& e) {
    return report_errors({e.what()}, 2);
  }

  commtrace::RunReport report;
  for (auto& [cmd, stage] : commands) {
    if (!cmd->parsed()) continue;
    spdlog::info("{} -> {}", cmd->get_name(), config.output_dir.string());
    report = stage ? commtrace::run_stage(config, *stage) : commtrace::run_pipeline(config);
  }
  if (!report.ok) {
    const bool validation = report.manifest.value("stages", nlohmann::ordered_json::object()).empty() ||
                            std::none_of(report.manifest["stages"].begin(), report.manifest["stages"].end(),
                                         [](const auto& s) { return s.value("status", "") == "failed"; });
    for (const auto& e : report.errors) spdlog::error("{}", e);
    return report_errors(report.errors, validation ? 2 : 1);
  }
  spdlog::info("done: {}", (config.output_dir / commtrace::kManifestFile).string());
  return 0;
}
