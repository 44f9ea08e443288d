#include "commtrace/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "commtrace/viz.hpp"
#include "tsv.hpp"

namespace commtrace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::build:
      return "build";
    case Stage::detect:
      return "detect";
    case Stage::track:
      return "track";
    case Stage::topics:
      return "topics";
    case Stage::measures:
      return "measures";
    case Stage::events:
      return "events";
    case Stage::layout:
      return "layout";
    case Stage::diagram:
      return "diagram";
  }
  return "?";
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages{Stage::build,    Stage::detect, Stage::track,  Stage::topics,
                                         Stage::measures, Stage::events, Stage::layout, Stage::diagram};
  return stages;
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (auto s : all_stages()) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : InvalidConfig(join(problems)), errors(std::move(problems)) {}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

class ConfigReader {
 public:
  std::vector<std::string> errors;

  bool object(const json& node, const std::string& where) {
    if (node.is_object()) return true;
    errors.push_back(where + ": expected an object");
    return false;
  }

  void allow(const json& node, const std::string& where, std::initializer_list<std::string_view> keys) {
    for (const auto& [key, value] : node.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        errors.push_back(fmt::format("{}: unknown key '{}'", where, key));
      }
    }
  }

  template <typename T>
  void integer(const json& node, const char* key, const std::string& where, T& out) {
    if (!node.contains(key)) return;
    const auto& v = node.at(key);
    if (!v.is_number_integer()) {
      errors.push_back(fmt::format("{}.{}: expected an integer", where, key));
      return;
    }
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_unsigned()) {
        out = v.get<T>();
      } else if (v.get<long long>() < 0) {
        errors.push_back(fmt::format("{}.{}: must not be negative", where, key));
      } else {
        out = static_cast<T>(v.get<long long>());
      }
    } else {
      out = v.get<T>();
    }
  }

  void real(const json& node, const char* key, const std::string& where, double& out) {
    if (!node.contains(key)) return;
    const auto& v = node.at(key);
    if (!v.is_number()) {
      errors.push_back(fmt::format("{}.{}: expected a number", where, key));
      return;
    }
    out = v.get<double>();
  }

  void boolean(const json& node, const char* key, const std::string& where, bool& out) {
    if (!node.contains(key)) return;
    const auto& v = node.at(key);
    if (!v.is_boolean()) {
      errors.push_back(fmt::format("{}.{}: expected true or false", where, key));
      return;
    }
    out = v.get<bool>();
  }

  bool string(const json& node, const char* key, const std::string& where, std::string& out) {
    if (!node.contains(key)) return false;
    const auto& v = node.at(key);
    if (!v.is_string()) {
      errors.push_back(fmt::format("{}.{}: expected a string", where, key));
      return false;
    }
    out = v.get<std::string>();
    return true;
  }

  void path(const json& node, const char* key, const std::string& where, const fs::path& base, fs::path& out) {
    std::string text;
    if (!string(node, key, where, text)) return;
    if (text.empty()) {
      errors.push_back(fmt::format("{}.{}: empty path", where, key));
      return;
    }
    fs::path p(text);
    out = p.is_absolute() ? p : (base / p).lexically_normal();
  }

  template <typename Enum>
  void choice(const json& node, const char* key, const std::string& where,
              std::initializer_list<std::pair<std::string_view, Enum>> options, Enum& out) {
    std::string text;
    if (!string(node, key, where, text)) return;
    for (const auto& [name, value] : options) {
      if (name == text) {
        out = value;
        return;
      }
    }
    std::string names;
    for (const auto& [name, value] : options) names += (names.empty() ? "" : "|") + std::string(name);
    errors.push_back(fmt::format("{}.{}: expected one of {} (got '{}')", where, key, names, text));
  }
};

std::optional<CommunityRef> parse_ref(ConfigReader& reader, const json& v, const std::string& where) {
  if (!v.is_string()) {
    reader.errors.push_back(where + ": expected a community reference like \"w3:c15\"");
    return std::nullopt;
  }
  try {
    return parse_community_ref(v.get<std::string>());
  } catch (const std::exception& e) {
    reader.errors.push_back(where + ": " + e.what());
    return std::nullopt;
  }
}

}  // namespace

Weighting effective_weighting(const PipelineConfig& config) {
  if (config.weighting) return *config.weighting;
  return config.detector == Detector::builtin ? Weighting::raw : Weighting::cocit;
}

PipelineConfig parse_config(const json& document, const fs::path& base_dir) {
  ConfigReader r;
  PipelineConfig c;
  if (!r.object(document, "config")) throw ConfigError(r.errors);
  r.allow(document, "config",
          {"schema_version", "inputs", "windows", "weighting", "detector", "resolution", "thresholds", "camps", "top_k",
           "seed", "tracking", "betweenness", "density", "layout", "diagrams", "output_dir", "threads"});

  if (!document.contains("schema_version")) {
    r.errors.push_back("config.schema_version: missing");
  } else {
    int version = 0;
    r.integer(document, "schema_version", "config", version);
    if (version != kConfigSchemaVersion && document.at("schema_version").is_number_integer()) {
      r.errors.push_back(fmt::format("config.schema_version: unsupported version {} (expected {})", version,
                                     kConfigSchemaVersion));
    }
  }

  if (document.contains("inputs") && r.object(document.at("inputs"), "inputs")) {
    const auto& in = document.at("inputs");
    r.allow(in, "inputs", {"citations", "docs", "keywords", "partitions_dir"});
    r.path(in, "citations", "inputs", base_dir, c.citations);
    r.path(in, "docs", "inputs", base_dir, c.docs);
    r.path(in, "keywords", "inputs", base_dir, c.keywords);
    r.path(in, "partitions_dir", "inputs", base_dir, c.partitions_dir);
  }

  if (document.contains("windows") && r.object(document.at("windows"), "windows")) {
    const auto& w = document.at("windows");
    r.allow(w, "windows", {"first_year", "last_year", "length", "stride", "include_short"});
    if (w.contains("first_year")) {
      int y = 0;
      r.integer(w, "first_year", "windows", y);
      c.windows.first_year = y;
    }
    if (w.contains("last_year")) {
      int y = 0;
      r.integer(w, "last_year", "windows", y);
      c.windows.last_year = y;
    }
    r.integer(w, "length", "windows", c.windows.length);
    r.integer(w, "stride", "windows", c.windows.stride);
    r.boolean(w, "include_short", "windows", c.windows.include_short);
  }

  if (document.contains("weighting")) {
    Weighting w = Weighting::raw;
    r.choice<Weighting>(document, "weighting", "config", {{"raw", Weighting::raw}, {"cocit", Weighting::cocit}}, w);
    c.weighting = w;
  }
  r.choice<Detector>(document, "detector", "config",
                     {{"builtin", Detector::builtin}, {"imported", Detector::imported}}, c.detector);
  r.real(document, "resolution", "config", c.resolution);

  if (document.contains("thresholds") && r.object(document.at("thresholds"), "thresholds")) {
    const auto& t = document.at("thresholds");
    r.allow(t, "thresholds", {"shift", "shift_merge", "topic_change", "min_overlap"});
    r.real(t, "shift", "thresholds", c.thresholds.shift);
    r.real(t, "shift_merge", "thresholds", c.thresholds.shift_merge);
    r.real(t, "topic_change", "thresholds", c.thresholds.topic_change);
    r.integer(t, "min_overlap", "thresholds", c.thresholds.min_overlap);
  }

  if (document.contains("camps") && r.object(document.at("camps"), "camps")) {
    c.camps.camps.clear();
    for (const auto& [label, keywords] : document.at("camps").items()) {
      if (!keywords.is_array() || !std::all_of(keywords.begin(), keywords.end(),
                                               [](const json& k) { return k.is_string(); })) {
        r.errors.push_back(fmt::format("camps.{}: expected an array of stemmed keywords", label));
        continue;
      }
      c.camps.camps[label] = keywords.get<std::vector<std::string>>();
    }
  }

  r.integer(document, "top_k", "config", c.top_k);
  r.integer(document, "seed", "config", c.seed);
  r.integer(document, "threads", "config", c.threads);

  if (document.contains("tracking") && r.object(document.at("tracking"), "tracking")) {
    const auto& t = document.at("tracking");
    r.allow(t, "tracking", {"min_annotated_fraction", "min_match_jaccard"});
    r.real(t, "min_annotated_fraction", "tracking", c.tracking.min_annotated_fraction);
    r.real(t, "min_match_jaccard", "tracking", c.tracking.min_match_jaccard);
  }

  r.choice<PathLength>(document, "betweenness", "config",
                       {{"inverse_weight", PathLength::inverse_weight}, {"hops", PathLength::hops}}, c.betweenness);
  r.choice<DensityMode>(document, "density", "config",
                        {{"edge_set", DensityMode::edge_set}, {"degree", DensityMode::degree}}, c.density);

  if (document.contains("layout") && r.object(document.at("layout"), "layout")) {
    const auto& l = document.at("layout");
    r.allow(l, "layout", {"iterations"});
    r.integer(l, "iterations", "layout", c.layout_iterations);
  }

  if (document.contains("diagrams")) {
    const auto& list = document.at("diagrams");
    if (!list.is_array()) {
      r.errors.push_back("config.diagrams: expected an array");
    } else {
      for (std::size_t i = 0; i < list.size(); ++i) {
        const auto where = fmt::format("diagrams[{}]", i);
        if (!r.object(list[i], where)) continue;
        r.allow(list[i], where, {"name", "focus", "min_fraction", "first_window", "last_window"});
        DiagramConfig d;
        r.string(list[i], "name", where, d.name);
        r.real(list[i], "min_fraction", where, d.min_fraction);
        if (list[i].contains("first_window")) {
          std::size_t w = 0;
          r.integer(list[i], "first_window", where, w);
          d.first_window = w;
        }
        if (list[i].contains("last_window")) {
          std::size_t w = 0;
          r.integer(list[i], "last_window", where, w);
          d.last_window = w;
        }
        if (list[i].contains("focus")) {
          const auto& focus = list[i].at("focus");
          if (!focus.is_array()) {
            r.errors.push_back(where + ".focus: expected an array");
          } else {
            for (std::size_t j = 0; j < focus.size(); ++j) {
              if (auto ref = parse_ref(r, focus[j], fmt::format("{}.focus[{}]", where, j))) d.focus.push_back(*ref);
            }
          }
        }
        c.diagrams.push_back(std::move(d));
      }
    }
  }

  r.path(document, "output_dir", "config", base_dir, c.output_dir);
  if (!document.contains("output_dir")) c.output_dir = (base_dir / c.output_dir).lexically_normal();

  if (!r.errors.empty()) throw ConfigError(r.errors);
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot open config file " + path.string()});
  json document;
  try {
    document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({fmt::format("{}: invalid JSON ({})", path.string(), e.what())});
  }
  return parse_config(document, path.parent_path());
}

ordered_json config_to_json(const PipelineConfig& c) {
  auto opt_path = [](const fs::path& p) -> ordered_json { return p.empty() ? ordered_json() : ordered_json(p.string()); };
  auto opt_int = [](const auto& v) -> ordered_json { return v ? ordered_json(*v) : ordered_json(); };
  ordered_json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["inputs"] = {{"citations", opt_path(c.citations)},
                 {"docs", opt_path(c.docs)},
                 {"keywords", opt_path(c.keywords)},
                 {"partitions_dir", opt_path(c.partitions_dir)}};
  j["windows"] = {{"first_year", opt_int(c.windows.first_year)},
                  {"last_year", opt_int(c.windows.last_year)},
                  {"length", c.windows.length},
                  {"stride", c.windows.stride},
                  {"include_short", c.windows.include_short}};
  j["weighting"] = effective_weighting(c) == Weighting::raw ? "raw" : "cocit";
  j["detector"] = c.detector == Detector::builtin ? "builtin" : "imported";
  j["resolution"] = c.resolution;
  j["thresholds"] = {{"shift", c.thresholds.shift},
                     {"shift_merge", c.thresholds.shift_merge},
                     {"topic_change", c.thresholds.topic_change},
                     {"min_overlap", c.thresholds.min_overlap}};
  ordered_json camps = ordered_json::object();
  for (const auto& [label, keywords] : c.camps.camps) camps[label] = keywords;
  j["camps"] = camps;
  j["top_k"] = c.top_k;
  j["seed"] = c.seed;
  j["tracking"] = {{"min_annotated_fraction", c.tracking.min_annotated_fraction},
                   {"min_match_jaccard", c.tracking.min_match_jaccard}};
  j["betweenness"] = c.betweenness == PathLength::hops ? "hops" : "inverse_weight";
  j["density"] = c.density == DensityMode::degree ? "degree" : "edge_set";
  j["layout"] = {{"iterations", c.layout_iterations}};
  ordered_json diagrams = ordered_json::array();
  for (const auto& d : c.diagrams) {
    ordered_json focus = ordered_json::array();
    for (const auto& f : d.focus) focus.push_back(to_string(f));
    diagrams.push_back({{"name", d.name},
                        {"focus", focus},
                        {"min_fraction", d.min_fraction},
                        {"first_window", opt_int(d.first_window)},
                        {"last_window", opt_int(d.last_window)}});
  }
  j["diagrams"] = diagrams;
  j["output_dir"] = c.output_dir.string();
  return j;
}

namespace {

bool needs(Stage stage, std::initializer_list<Stage> users) {
  return std::find(users.begin(), users.end(), stage) != users.end();
}

void check_fraction(std::vector<std::string>& errors, const char* name, double v) {
  if (!(v >= 0.0 && v <= 1.0)) errors.push_back(fmt::format("{} must lie in [0, 1] (got {})", name, v));
}

void check_file(std::vector<std::string>& errors, const char* name, const fs::path& p) {
  if (p.empty()) {
    errors.push_back(fmt::format("inputs.{}: required", name));
  } else if (!fs::is_regular_file(p)) {
    errors.push_back(fmt::format("inputs.{}: file not found: {}", name, p.string()));
  }
}

}  // namespace

std::vector<std::string> validate_config(const PipelineConfig& c, Stage stage) {
  std::vector<std::string> errors;
  if (c.windows.length < 1) errors.push_back("windows.length must be at least 1");
  if (c.windows.stride < 1) errors.push_back("windows.stride must be at least 1");
  if (c.windows.first_year && c.windows.last_year && *c.windows.first_year > *c.windows.last_year) {
    errors.push_back("windows.first_year is after windows.last_year");
  }
  if (!(c.resolution > 0.0)) errors.push_back("resolution must be positive");
  check_fraction(errors, "thresholds.shift", c.thresholds.shift);
  check_fraction(errors, "thresholds.shift_merge", c.thresholds.shift_merge);
  check_fraction(errors, "thresholds.topic_change", c.thresholds.topic_change);
  if (c.thresholds.min_overlap < 1) errors.push_back("thresholds.min_overlap must be at least 1");
  check_fraction(errors, "tracking.min_annotated_fraction", c.tracking.min_annotated_fraction);
  check_fraction(errors, "tracking.min_match_jaccard", c.tracking.min_match_jaccard);
  if (c.top_k < 1) errors.push_back("top_k must be at least 1");
  if (c.layout_iterations < 0) errors.push_back("layout.iterations must not be negative");
  try {
    c.camps.validate();
  } catch (const InvalidConfig& e) {
    errors.push_back(std::string("camps: ") + e.what());
  }
  std::set<std::string> names;
  for (const auto& d : c.diagrams) {
    if (d.name.empty() || d.name.find_first_of("/\\") != std::string::npos) {
      errors.push_back(fmt::format("diagram name '{}' is not a plain file name", d.name));
    }
    if (!names.insert(d.name).second) errors.push_back(fmt::format("diagram name '{}' used twice", d.name));
    check_fraction(errors, "diagram min_fraction", d.min_fraction);
    if (d.first_window && d.last_window && *d.first_window > *d.last_window) {
      errors.push_back(fmt::format("diagram '{}': first_window is after last_window", d.name));
    }
  }
  if (c.output_dir.empty()) errors.push_back("output_dir: required");

  if (needs(stage, {Stage::build, Stage::topics, Stage::measures, Stage::events})) {
    check_file(errors, "citations", c.citations);
    check_file(errors, "docs", c.docs);
  }
  if (needs(stage, {Stage::topics, Stage::measures, Stage::events})) check_file(errors, "keywords", c.keywords);
  if (stage == Stage::detect && c.detector == Detector::imported) {
    if (c.partitions_dir.empty()) {
      errors.push_back("inputs.partitions_dir: required by the imported detector");
    } else if (!fs::is_directory(c.partitions_dir)) {
      errors.push_back("inputs.partitions_dir: directory not found: " + c.partitions_dir.string());
    }
  }
  return errors;
}

// ---------------------------------------------------------------------------
// Stage plumbing

fs::path window_dir(const fs::path& out, std::size_t window) { return out / "windows" / fmt::format("w{}", window); }

namespace {

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  body(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string() + " (has the previous stage run?)");
  return in;
}

void write_windows(const fs::path& path, const std::vector<TemporalWindow>& windows) {
  write_file(path, [&](std::ostream& out) {
    for (std::size_t i = 0; i < windows.size(); ++i) {
      out << i << '\t' << windows[i].start_year << '\t' << windows[i].end_year << '\n';
    }
  });
}

std::vector<TemporalWindow> read_windows(const fs::path& path) {
  auto in = open_input(path);
  const auto source = path.string();
  std::vector<TemporalWindow> windows;
  std::string line;
  std::size_t line_no = 0;
  while (tsv::next_record(in, line, line_no)) {
    auto cols = tsv::split(line, '\t');
    if (cols.size() != 3) throw FormatError(source, line_no, "expected 3 columns");
    auto idx = tsv::parse_int<std::size_t>(cols[0]);
    auto start = tsv::parse_int<int>(cols[1]);
    auto end = tsv::parse_int<int>(cols[2]);
    if (!idx || !start || !end || *start > *end) throw FormatError(source, line_no, "malformed window row");
    if (*idx != windows.size()) throw FormatError(source, line_no, "window indices must run 0, 1, 2, ...");
    windows.emplace_back(*start, *end);
  }
  if (windows.empty()) throw FormatError(source, "no windows");
  return windows;
}

struct Context {
  const PipelineConfig& config;
  fs::path out;
  std::optional<std::vector<TemporalWindow>> windows_;
  std::optional<std::vector<SnapshotGraph>> graphs_;
  std::optional<std::vector<Partition>> partitions_;
  std::optional<std::pair<Vocabulary, std::vector<AuthorVectors>>> topics_;
  std::optional<std::size_t> unknown_keyword_docs_;

  explicit Context(const PipelineConfig& c) : config(c), out(c.output_dir) {}

  const std::vector<TemporalWindow>& windows() {
    if (!windows_) windows_ = read_windows(out / "windows.tsv");
    return *windows_;
  }

  const std::vector<SnapshotGraph>& graphs() {
    if (!graphs_) {
      std::vector<SnapshotGraph> gs;
      for (std::size_t w = 0; w < windows().size(); ++w) {
        auto path = window_dir(out, w) / "edges.tsv";
        auto in = open_input(path);
        gs.push_back(read_edges(in, windows()[w], path.string()));
      }
      graphs_ = std::move(gs);
    }
    return *graphs_;
  }

  const std::vector<Partition>& partitions() {
    if (!partitions_) {
      std::vector<Partition> ps;
      for (std::size_t w = 0; w < windows().size(); ++w) {
        auto path = window_dir(out, w) / "partition.tsv";
        auto in = open_input(path);
        ps.push_back(read_partition(in, windows()[w], &graphs()[w], path.string()));
      }
      partitions_ = std::move(ps);
    }
    return *partitions_;
  }

  LineageGraph lineage() { return build_lineage(partitions(), config.tracking); }

  BetweennessOptions betweenness_options() const {
    BetweennessOptions b;
    b.length = config.betweenness;
    b.threads = config.threads > 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    return b;
  }

  const std::pair<Vocabulary, std::vector<AuthorVectors>>& topics() {
    if (!topics_) {
      auto corpus = load_corpus(config.citations, config.docs);
      auto in = open_input(config.keywords);
      auto assignments = read_keywords(in, config.keywords.string());
      std::size_t unknown = 0;
      for (const auto& a : assignments) {
        if (corpus.find_doc(a.doc_id) == nullptr) ++unknown;
      }
      unknown_keyword_docs_ = unknown;
      auto vocab = Vocabulary::from_assignments(assignments);
      std::vector<AuthorVectors> vectors;
      for (const auto& w : windows()) vectors.push_back(build_author_vectors(assignments, corpus, w, vocab));
      topics_.emplace(std::move(vocab), std::move(vectors));
    }
    return *topics_;
  }

  WindowSeries series() {
    SeriesOptions options;
    options.betweenness = betweenness_options();
    options.lineage = config.tracking;
    return make_series(graphs(), partitions(), topics().second, options);
  }
};

using Counts = ordered_json;

Counts stage_build(Context& ctx) {
  const auto& c = ctx.config;
  auto corpus = load_corpus(c.citations, c.docs);
  auto range = corpus.year_range();
  if (!range && !(c.windows.first_year && c.windows.last_year)) {
    throw InvalidConfig("the corpus has no documents and no window years were given");
  }
  const int first = c.windows.first_year.value_or(range ? range->first : 0);
  const int last = c.windows.last_year.value_or(range ? range->second : 0);
  if (first > last) throw InvalidConfig(fmt::format("empty year range {}..{}", first, last));
  std::vector<TemporalWindow> windows;
  std::size_t dropped_short = 0;
  for (const auto& w : build_windows(first, last, c.windows.length, c.windows.stride)) {
    if (w.length() < c.windows.length && !c.windows.include_short) {
      ++dropped_short;
      continue;
    }
    windows.push_back(w);
  }
  if (windows.empty()) {
    throw InvalidConfig(fmt::format("no {}-year window fits in {}..{} (set windows.include_short)",
                                    c.windows.length, first, last));
  }

  std::error_code ignored;
  fs::remove_all(ctx.out / "windows", ignored);
  fs::remove_all(ctx.out / "diagrams", ignored);

  BuildReport report;
  std::size_t reconciled = 0;
  ordered_json per_window = ordered_json::array();
  for (std::size_t i = 0; i < windows.size(); ++i) {
    BuildReport window_report;
    auto graph = build_cocitation(corpus, windows[i], &window_report);
    // Every window sees the same records, so one window's tally is the total.
    if (i == 0) report.missing_metadata = window_report.missing_metadata;
    if (effective_weighting(c) == Weighting::cocit) {
      auto counts = author_citation_counts(corpus, windows[i]);
      reconciled += reconcile_citation_counts(graph, counts);
      graph = cocit_normalize(graph, counts);
    }
    write_file(window_dir(ctx.out, i) / "edges.tsv", [&](std::ostream& out) { write_edges(out, graph); });
    per_window.push_back({{"window", windows[i].label()}, {"nodes", graph.node_count()}, {"edges", graph.edges().size()}});
  }
  write_windows(ctx.out / "windows.tsv", windows);

  Counts counts;
  counts["citation_records"] = corpus.record_count();
  counts["documents"] = corpus.docs().size();
  counts["windows"] = per_window;
  counts["skipped"] = {{"duplicate_records", corpus.duplicate_records()},
                       {"self_citations", corpus.self_citations()},
                       {"missing_metadata", report.missing_metadata},
                       {"short_windows", dropped_short},
                       {"raised_citation_counts", reconciled}};
  return counts;
}

Counts stage_detect(Context& ctx) {
  const auto& c = ctx.config;
  const auto& windows = ctx.windows();
  const auto& graphs = ctx.graphs();
  ordered_json per_window = ordered_json::array();
  std::size_t total = 0;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    Partition p;
    if (c.detector == Detector::imported) {
      auto path = c.partitions_dir / fmt::format("w{}.tsv", w);
      auto in = open_input(path);
      p = read_partition(in, windows[w], &graphs[w], path.string());
    } else {
      LouvainOptions options;
      options.seed = derive_seed(c.seed, "detect", w);
      options.resolution = c.resolution;
      p = louvain_detect(graphs[w], options);
    }
    write_file(window_dir(ctx.out, w) / "partition.tsv", [&](std::ostream& out) { write_partition(out, p); });
    per_window.push_back({{"window", windows[w].label()},
                          {"communities", p.community_count()},
                          {"modularity", std::stod(format_fixed(modularity(graphs[w], p, c.resolution), 6))}});
    total += p.community_count();
  }
  return {{"detector", c.detector == Detector::builtin ? "builtin" : "imported"},
          {"communities", total},
          {"windows", per_window}};
}

Counts stage_track(Context& ctx) {
  auto lineage = ctx.lineage();
  write_file(ctx.out / "lineage.tsv", [&](std::ostream& out) { write_lineage(out, lineage); });
  std::size_t matches = 0;
  for (const auto& e : lineage.edges()) matches += e.relation == Relation::match ? 1 : 0;
  return {{"lineage_edges", lineage.edges().size()}, {"matches", matches}};
}

Counts stage_topics(Context& ctx) {
  const auto& [vocab, vectors] = ctx.topics();
  const auto& partitions = ctx.partitions();
  std::size_t rows = 0;
  write_file(ctx.out / "centroids.tsv", [&](std::ostream& out) {
    for (std::size_t w = 0; w < partitions.size(); ++w) {
      for (std::size_t k = 0; k < partitions[w].community_count(); ++k) {
        const int id = static_cast<int>(k);
        write_centroid_row(out, {{w, id}, centroid(partitions[w].members(id), vectors[w])}, vocab);
        ++rows;
      }
    }
  });
  return {{"vocabulary", vocab.size()},
          {"centroids", rows},
          {"skipped", {{"keyword_rows_for_unknown_docs", *ctx.unknown_keyword_docs_}}}};
}

Counts stage_measures(Context& ctx) {
  auto series = ctx.series();
  auto profiles = lifecycle_profiles(series, ctx.config.density);
  auto assessment = assess_series(series);
  write_file(ctx.out / "profiles.tsv", [&](std::ostream& out) { write_profiles(out, profiles); });
  write_file(ctx.out / "assessment.tsv", [&](std::ostream& out) { write_assessment(out, assessment); });
  return {{"profiles", profiles.size()}};
}

Counts stage_events(Context& ctx) {
  auto series = ctx.series();
  auto events = detect_events(series, ctx.config.thresholds);
  label_events(events, series, ctx.topics().first, ctx.config.camps, ctx.config.top_k);
  write_file(ctx.out / "events.jsonl", [&](std::ostream& out) { write_events(out, events); });
  ordered_json by_kind = {{"shift", 0}, {"shift_merge", 0}, {"topic_change", 0}};
  std::size_t inter = 0;
  for (const auto& e : events) {
    by_kind[std::string(to_string(e.kind))] = by_kind[std::string(to_string(e.kind))].get<std::size_t>() + 1;
    inter += e.inter_camp ? 1 : 0;
  }
  return {{"events", by_kind}, {"inter_camp", inter}};
}

Counts stage_layout(Context& ctx) {
  const auto& graphs = ctx.graphs();
  const auto& partitions = ctx.partitions();
  auto colors = assign_colors(ctx.lineage());
  LayoutState state;
  for (std::size_t w = 0; w < graphs.size(); ++w) {
    LayoutOptions options;
    options.seed = derive_seed(ctx.config.seed, "layout", w);
    options.iterations = ctx.config.layout_iterations;
    options.partition = &partitions[w];
    state = fr_layout(graphs[w], state, options);
    auto b = vertex_betweenness(graphs[w], ctx.betweenness_options());
    std::map<AuthorId, double> by_author;
    for (std::size_t i = 0; i < b.size(); ++i) by_author[graphs[w].node(i)] = b[i];
    write_file(window_dir(ctx.out, w) / "layout.tsv",
               [&](std::ostream& out) { emit_snapshot_layout(out, state, partitions[w], by_author, colors, w); });
  }
  int lines = 0;
  for (const auto& [ref, color] : colors) lines = std::max(lines, color + 1);
  return {{"colour_lines", lines}};
}

Counts stage_diagram(Context& ctx) {
  auto lineage = ctx.lineage();
  const auto& windows = ctx.windows();
  auto diagrams = ctx.config.diagrams;
  if (diagrams.empty()) diagrams.push_back(DiagramConfig{});
  ordered_json written = ordered_json::array();
  for (const auto& d : diagrams) {
    DiagramSpec spec;
    spec.min_fraction = d.min_fraction;
    spec.first_window = d.first_window;
    spec.last_window = d.last_window;
    spec.focus = d.focus;
    if (spec.focus.empty()) {
      const std::size_t lo = d.first_window.value_or(0);
      const std::size_t hi = std::min(d.last_window.value_or(windows.size() - 1), windows.size() - 1);
      for (std::size_t w = lo; w <= hi; ++w) {
        for (std::size_t k = 0; k < lineage.community_count(w); ++k) spec.focus.push_back({w, static_cast<int>(k)});
      }
    }
    auto dot = emit_evolution_dot(lineage, spec, windows);
    auto name = d.name + ".dot";
    write_file(ctx.out / "diagrams" / name, [&](std::ostream& out) { out << dot; });
    written.push_back(name);
  }
  return {{"diagrams", written}};
}

Counts dispatch(Context& ctx, Stage stage) {
  switch (stage) {
    case Stage::build:
      return stage_build(ctx);
    case Stage::detect:
      return stage_detect(ctx);
    case Stage::track:
      return stage_track(ctx);
    case Stage::topics:
      return stage_topics(ctx);
    case Stage::measures:
      return stage_measures(ctx);
    case Stage::events:
      return stage_events(ctx);
    case Stage::layout:
      return stage_layout(ctx);
    case Stage::diagram:
      return stage_diagram(ctx);
  }
  return {};
}

ordered_json load_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return ordered_json::object();
  try {
    auto m = ordered_json::parse(in);
    if (m.is_object()) return m;
  } catch (const std::exception&) {
  }
  return ordered_json::object();
}

void save_manifest(const fs::path& out, const ordered_json& manifest) {
  auto tmp = out / (std::string(kManifestFile) + ".tmp");
  write_file(tmp, [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
  fs::rename(tmp, out / kManifestFile);
}

ordered_json fresh_manifest(const PipelineConfig& config) {
  ordered_json m;
  m["schema_version"] = kConfigSchemaVersion;
  m["status"] = "running";
  m["errors"] = ordered_json::array();
  m["config"] = config_to_json(config);
  m["stages"] = ordered_json::object();
  m["timings_ms"] = ordered_json::object();
  return m;
}

RunReport fail(const fs::path& out, ordered_json manifest, std::vector<std::string> errors,
               std::optional<Stage> stage) {
  manifest["status"] = "failed";
  manifest["errors"] = errors;
  if (stage) manifest["stages"][std::string(to_string(*stage))] = {{"status", "failed"}};
  try {
    fs::create_directories(out);
    save_manifest(out, manifest);
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  return {false, std::move(errors), std::move(manifest)};
}

RunReport execute(const PipelineConfig& config, Stage stage, ordered_json manifest, Context& ctx) {
  const auto name = std::string(to_string(stage));
  manifest["status"] = "running";
  manifest["errors"] = ordered_json::array();
  manifest["config"] = config_to_json(config);
  manifest["stages"][name] = {{"status", "running"}};
  try {
    fs::create_directories(ctx.out);
    save_manifest(ctx.out, manifest);
  } catch (const std::exception& e) {
    return {false, {e.what()}, manifest};
  }
  const auto start = std::chrono::steady_clock::now();
  Counts counts;
  try {
    counts = dispatch(ctx, stage);
  } catch (const std::exception& e) {
    return fail(ctx.out, std::move(manifest), {fmt::format("{}: {}", name, e.what())}, stage);
  }
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  manifest["stages"][name] = {{"status", "ok"}, {"counts", counts}};
  manifest["timings_ms"][name] = elapsed.count();
  manifest["status"] = "ok";
  save_manifest(ctx.out, manifest);
  return {true, {}, std::move(manifest)};
}

}  // namespace

RunReport run_stage(const PipelineConfig& config, Stage stage) {
  auto manifest = stage == Stage::build ? fresh_manifest(config) : load_manifest(config.output_dir / kManifestFile);
  if (manifest.empty()) manifest = fresh_manifest(config);
  auto errors = validate_config(config, stage);
  if (!errors.empty()) return fail(config.output_dir, std::move(manifest), std::move(errors), std::nullopt);
  Context ctx(config);
  return execute(config, stage, std::move(manifest), ctx);
}

RunReport run_pipeline(const PipelineConfig& config) {
  auto manifest = fresh_manifest(config);
  std::vector<std::string> errors;
  for (auto stage : all_stages()) {
    for (auto& e : validate_config(config, stage)) {
      if (std::find(errors.begin(), errors.end(), e) == errors.end()) errors.push_back(std::move(e));
    }
  }
  if (!errors.empty()) return fail(config.output_dir, std::move(manifest), std::move(errors), std::nullopt);
  Context ctx(config);
  RunReport report;
  for (auto stage : all_stages()) {
    report = execute(config, stage, std::move(manifest), ctx);
    if (!report.ok) return report;
    manifest = report.manifest;
  }
  return report;
}

}  // namespace commtrace
