#include "commtrace/track.hpp"

#include <map>
#include <ostream>
#include <tuple>

#include <fmt/format.h>

namespace commtrace {

double jaccard(const MemberSet& a, const MemberSet& b) {
  if (a.empty() && b.empty()) return 0.0;
  auto inter = intersection_size(a, b);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

double ancestor_fraction(const MemberSet& prev, const MemberSet& next) {
  if (next.empty()) throw UndefinedFraction("ancestor fraction of an empty community");
  return static_cast<double>(intersection_size(prev, next)) / static_cast<double>(next.size());
}

double descendant_fraction(const MemberSet& prev, const MemberSet& next) {
  if (prev.empty()) throw UndefinedFraction("descendant fraction of an empty community");
  return static_cast<double>(intersection_size(prev, next)) / static_cast<double>(prev.size());
}

namespace {

struct Overlap {
  int from;
  int to;
  std::size_t inter;
  std::size_t uni;
};

// Positive-overlap pairs between two partitions, ordered by (from, to).
std::vector<Overlap> overlaps(const Partition& current, const Partition& next) {
  std::map<std::pair<int, int>, std::size_t> counts;
  for (const auto& [author, c] : current.assignment()) {
    if (auto d = next.community_of(author)) ++counts[{c, *d}];
  }
  std::vector<Overlap> out;
  out.reserve(counts.size());
  for (const auto& [key, inter] : counts) {
    auto size_a = current.communities()[key.first].size();
    auto size_b = next.communities()[key.second].size();
    out.push_back({key.first, key.second, inter, size_a + size_b - inter});
  }
  return out;
}

}  // namespace

std::vector<Match> match_partitions(const Partition& current, const Partition& next, double min_jaccard) {
  auto candidates = overlaps(current, next);
  // Exact rational ordering: higher Jaccard first, then lower source id,
  // then lower target id.
  std::sort(candidates.begin(), candidates.end(), [](const Overlap& x, const Overlap& y) {
    auto lhs = static_cast<unsigned long long>(x.inter) * y.uni;
    auto rhs = static_cast<unsigned long long>(y.inter) * x.uni;
    if (lhs != rhs) return lhs > rhs;
    if (x.from != y.from) return x.from < y.from;
    return x.to < y.to;
  });

  std::vector<char> source_taken(current.community_count(), 0);
  std::vector<char> target_taken(next.community_count(), 0);
  std::vector<Match> out;
  for (const auto& c : candidates) {
    if (source_taken[c.from] || target_taken[c.to]) continue;
    double j = static_cast<double>(c.inter) / static_cast<double>(c.uni);
    if (j < min_jaccard) continue;
    source_taken[c.from] = 1;
    target_taken[c.to] = 1;
    out.push_back({c.from, c.to, j});
  }
  std::sort(out.begin(), out.end(), [](const Match& a, const Match& b) { return a.from < b.from; });
  return out;
}

std::string_view to_string(Relation relation) {
  switch (relation) {
    case Relation::match:
      return "match";
    case Relation::ancestor:
      return "ancestor";
    case Relation::descendant:
      return "descendant";
  }
  return "?";
}

LineageGraph::LineageGraph(std::vector<std::size_t> community_counts, std::vector<LineageEdge> edges)
    : community_counts_(std::move(community_counts)), edges_(std::move(edges)) {
  std::sort(edges_.begin(), edges_.end(), [](const LineageEdge& a, const LineageEdge& b) {
    return std::tie(a.window, a.from, a.relation, a.to) < std::tie(b.window, b.from, b.relation, b.to);
  });
  match_out_.resize(community_counts_.size());
  match_in_.resize(community_counts_.size());
  match_value_.resize(community_counts_.size());
  for (std::size_t w = 0; w < community_counts_.size(); ++w) {
    match_out_[w].assign(community_counts_[w], -1);
    match_in_[w].assign(community_counts_[w], -1);
    match_value_[w].assign(community_counts_[w], 0.0);
  }
  for (const auto& e : edges_) {
    if (e.window + 1 >= community_counts_.size()) throw std::invalid_argument("lineage edge past last window");
    if (e.from < 0 || static_cast<std::size_t>(e.from) >= community_counts_[e.window] || e.to < 0 ||
        static_cast<std::size_t>(e.to) >= community_counts_[e.window + 1]) {
      throw std::invalid_argument("lineage edge refers to a missing community");
    }
    if (e.value < 0.0 || e.value > 1.0) throw std::invalid_argument("lineage annotation outside [0, 1]");
    if (e.relation != Relation::match) continue;
    auto& out = match_out_[e.window][e.from];
    auto& in = match_in_[e.window + 1][e.to];
    if (out >= 0 || in >= 0) throw std::invalid_argument("community with two match edges");
    out = e.to;
    in = e.from;
    match_value_[e.window][e.from] = e.value;
  }
}

bool LineageGraph::exists(CommunityRef ref) const {
  return ref.window < community_counts_.size() && ref.community >= 0 &&
         static_cast<std::size_t>(ref.community) < community_counts_[ref.window];
}

std::optional<LineageEdge> LineageGraph::match_from(CommunityRef ref) const {
  if (!exists(ref)) throw LookupError("no community " + to_string(ref));
  int to = match_out_[ref.window][ref.community];
  if (to < 0) return std::nullopt;
  return LineageEdge{ref.window, ref.community, to, Relation::match, match_value_[ref.window][ref.community]};
}

std::optional<LineageEdge> LineageGraph::match_into(CommunityRef ref) const {
  if (!exists(ref)) throw LookupError("no community " + to_string(ref));
  if (ref.window == 0) return std::nullopt;
  int from = match_in_[ref.window][ref.community];
  if (from < 0) return std::nullopt;
  return match_from({ref.window - 1, from});
}

bool LineageGraph::matched(CommunityRef from, int to) const {
  if (!exists(from) || from.window + 1 >= community_counts_.size()) return false;
  return match_out_[from.window][from.community] == to;
}

LineageGraph build_lineage(const std::vector<Partition>& partitions, const LineageOptions& options) {
  for (std::size_t w = 2; w < partitions.size(); ++w) {
    int step = partitions[w - 1].window().start_year - partitions[w - 2].window().start_year;
    int here = partitions[w].window().start_year - partitions[w - 1].window().start_year;
    if (step != here) {
      throw InvalidConfig(fmt::format("windows {} and {} are not consecutive", partitions[w - 1].window().label(),
                                      partitions[w].window().label()));
    }
  }
  for (std::size_t w = 1; w < partitions.size(); ++w) {
    if (partitions[w].window().start_year <= partitions[w - 1].window().start_year) {
      throw InvalidConfig("partitions are not in chronological order");
    }
  }

  std::vector<std::size_t> counts;
  for (const auto& p : partitions) counts.push_back(p.community_count());
  std::vector<LineageEdge> edges;
  for (std::size_t w = 0; w + 1 < partitions.size(); ++w) {
    const auto& current = partitions[w];
    const auto& next = partitions[w + 1];
    for (const auto& m : match_partitions(current, next, options.min_match_jaccard)) {
      edges.push_back({w, m.from, m.to, Relation::match, m.jaccard});
    }
    for (const auto& o : overlaps(current, next)) {
      const auto& a = current.communities()[o.from];
      const auto& b = next.communities()[o.to];
      double anc = ancestor_fraction(a, b);
      double desc = descendant_fraction(a, b);
      if (anc >= options.min_annotated_fraction) edges.push_back({w, o.from, o.to, Relation::ancestor, anc});
      if (desc >= options.min_annotated_fraction) edges.push_back({w, o.from, o.to, Relation::descendant, desc});
    }
  }
  return LineageGraph(std::move(counts), std::move(edges));
}

void write_lineage(std::ostream& out, const LineageGraph& lineage) {
  for (const auto& e : lineage.edges()) {
    out << e.window << '\t' << e.from << '\t' << to_string(e.relation) << '\t' << e.to << '\t'
        << format_fixed(e.value, 4) << '\n';
  }
}

}  // namespace commtrace
