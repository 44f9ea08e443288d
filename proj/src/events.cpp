#include "commtrace/events.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

namespace commtrace {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::shift:
      return "shift";
    case EventKind::shift_merge:
      return "shift_merge";
    case EventKind::topic_change:
      return "topic_change";
  }
  return "?";
}

namespace {

double checked_product(double dissim, double structural, const char* what) {
  if (dissim < 0.0 || dissim > 1.0 || structural < 0.0 || structural > 1.0) {
    throw std::invalid_argument(fmt::format("{} factors must lie in [0, 1] (got {} and {})", what, dissim, structural));
  }
  return dissim * structural;
}

void require_consecutive(const WindowSeries& series, CommunityRef source, int target) {
  if (!series.lineage.exists(source) || !series.lineage.exists({source.window + 1, target})) {
    throw LookupError(fmt::format("no community pair {} -> c{} in the next window", to_string(source), target));
  }
}

void require_cross_line(const WindowSeries& series, CommunityRef source, int target) {
  require_consecutive(series, source, target);
  if (series.lineage.matched(source, target)) {
    throw InvalidPair(fmt::format("{} and its match c{} belong to the same line", to_string(source), target));
  }
}

}  // namespace

double shift_score(double dissim, double ancestor) { return checked_product(dissim, ancestor, "shift"); }

double shift_merge_score(double dissim, double descendant) {
  return checked_product(dissim, descendant, "shift/merge");
}

double topic_change_score(double dissim, double entropy) {
  return checked_product(dissim, 1.0 - entropy, "topic change");
}

double shift_score(const MemberSet& previous, const MemberSet& next, const TermVector& previous_centroid,
                   const TermVector& next_centroid) {
  return shift_score(dissim(previous_centroid, next_centroid), ancestor_fraction(previous, next));
}

double shift_merge_score(const MemberSet& previous, const MemberSet& next, const TermVector& previous_centroid,
                         const TermVector& next_centroid) {
  return shift_merge_score(dissim(previous_centroid, next_centroid), descendant_fraction(previous, next));
}

double shift_score(const WindowSeries& series, CommunityRef source, int target) {
  require_cross_line(series, source, target);
  CommunityRef next{source.window + 1, target};
  return shift_score(series.members(source), series.members(next), series.centroid_of(source),
                     series.centroid_of(next));
}

double shift_merge_score(const WindowSeries& series, CommunityRef source, int target) {
  require_cross_line(series, source, target);
  CommunityRef next{source.window + 1, target};
  return shift_merge_score(series.members(source), series.members(next), series.centroid_of(source),
                           series.centroid_of(next));
}

double topic_change_score(const WindowSeries& series, CommunityRef source) {
  auto match = series.lineage.match_from(source);
  if (!match) throw InvalidPair(fmt::format("{} has no match in the next window", to_string(source)));
  CommunityRef next{source.window + 1, match->to};
  double entropy = author_entropy(series.members(source), series.partitions[next.window]);
  return topic_change_score(dissim(series.centroid_of(source), series.centroid_of(next)), entropy);
}

namespace {

EventRecord make_event(EventKind kind, CommunityRef source, CommunityRef target, double score, std::size_t overlap,
                       double dissim, double structural) {
  EventRecord e;
  e.kind = kind;
  e.source = source;
  e.target = target;
  e.score = score;
  e.overlap = overlap;
  e.dissim = dissim;
  e.structural = structural;
  return e;
}

}  // namespace

std::vector<EventRecord> detect_events(const WindowSeries& series, const EventThresholds& thresholds) {
  std::vector<EventRecord> events;
  for (std::size_t w = 0; w + 1 < series.window_count(); ++w) {
    const auto& current = series.partitions[w];
    const auto& next = series.partitions[w + 1];
    std::map<std::pair<int, int>, std::size_t> overlap;
    for (const auto& [author, c] : current.assignment()) {
      if (auto d = next.community_of(author)) ++overlap[{c, *d}];
    }
    for (const auto& [pair, shared] : overlap) {
      if (shared < thresholds.min_overlap) continue;
      CommunityRef source{w, pair.first};
      CommunityRef target{w + 1, pair.second};
      const auto& prev_members = series.members(source);
      const auto& next_members = series.members(target);
      const double d = dissim(series.centroid_of(source), series.centroid_of(target));
      if (series.lineage.matched(source, pair.second)) {
        const double entropy = author_entropy(prev_members, next);
        const double score = topic_change_score(d, entropy);
        if (score >= thresholds.topic_change) {
          events.push_back(make_event(EventKind::topic_change, source, target, score, shared, d, 1.0 - entropy));
        }
        continue;
      }
      const double anc = ancestor_fraction(prev_members, next_members);
      const double desc = descendant_fraction(prev_members, next_members);
      const double ps = shift_score(d, anc);
      if (ps >= thresholds.shift) {
        auto e = make_event(EventKind::shift, source, target, ps, shared, d, anc);
        e.vanishes_next = !series.lineage.match_from(source).has_value();
        events.push_back(std::move(e));
      }
      const double psm = shift_merge_score(d, desc);
      if (psm >= thresholds.shift_merge) {
        events.push_back(make_event(EventKind::shift_merge, source, target, psm, shared, d, desc));
      }
    }
  }
  std::sort(events.begin(), events.end(), [](const EventRecord& a, const EventRecord& b) {
    if (a.source.window != b.source.window) return a.source.window < b.source.window;
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.source.community, a.target.community) < std::tie(b.source.community, b.target.community);
  });
  return events;
}

CampConfig CampConfig::defaults() {
  CampConfig c;
  c.camps["SW"] = {"semant", "ontolog", "rdf"};
  c.camps["IR"] = {"ir", "retriev"};
  return c;
}

void CampConfig::validate() const {
  for (const auto& [label, keywords] : camps) {
    if (label.empty()) throw InvalidConfig("empty camp label");
    if (keywords.empty()) throw InvalidConfig("camp '" + label + "' has no keywords");
    for (const auto& k : keywords) {
      if (k.empty()) throw InvalidConfig("camp '" + label + "' has an empty keyword");
    }
  }
}

std::vector<std::string> classify_camps(const std::vector<std::string>& characterising, const CampConfig& config) {
  std::set<std::string> present(characterising.begin(), characterising.end());
  std::vector<std::string> out;
  for (const auto& [label, keywords] : config.camps) {
    if (std::any_of(keywords.begin(), keywords.end(), [&](const std::string& k) { return present.contains(k); })) {
      out.push_back(label);
    }
  }
  return out;
}

EventRecord flag_inter_camp(EventRecord event, const std::vector<std::string>& source_camps,
                            const std::vector<std::string>& target_camps) {
  std::set<std::string> all(source_camps.begin(), source_camps.end());
  all.insert(target_camps.begin(), target_camps.end());
  event.camps.assign(all.begin(), all.end());
  event.inter_camp = all.size() >= 2;
  return event;
}

void label_events(std::vector<EventRecord>& events, const WindowSeries& series, const Vocabulary& vocabulary,
                  const CampConfig& config, std::size_t top_k) {
  std::map<CommunityRef, std::vector<std::string>> cache;
  auto camps_of = [&](CommunityRef ref) -> const std::vector<std::string>& {
    auto it = cache.find(ref);
    if (it != cache.end()) return it->second;
    auto keywords = characterising_keywords(series.members(ref), series.vectors[ref.window], vocabulary, top_k);
    return cache.emplace(ref, classify_camps(keywords, config)).first->second;
  };
  for (auto& e : events) e = flag_inter_camp(std::move(e), camps_of(e.source), camps_of(e.target));
}

void write_events(std::ostream& out, const std::vector<EventRecord>& events) {
  // Hand-assembled so numbers keep the fixed five-decimal form.
  for (const auto& e : events) {
    out << "{\"kind\":" << nlohmann::json(std::string(to_string(e.kind))).dump()
        << ",\"window_from\":" << e.source.window << ",\"window_to\":" << e.target.window
        << ",\"source_id\":" << e.source.community << ",\"target_id\":" << e.target.community
        << ",\"score\":" << format_fixed(e.score, 5) << ",\"dissim\":" << format_fixed(e.dissim, 5)
        << ",\"structural\":" << format_fixed(e.structural, 5) << ",\"overlap\":" << e.overlap
        << ",\"camps\":" << nlohmann::json(e.camps).dump() << ",\"inter_camp\":" << (e.inter_camp ? "true" : "false");
    if (e.vanishes_next) out << ",\"vanishes_next\":" << (*e.vanishes_next ? "true" : "false");
    out << "}\n";
  }
}

}  // namespace commtrace
