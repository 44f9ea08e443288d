#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "commtrace/common.hpp"
#include "commtrace/detect.hpp"

namespace commtrace {

double jaccard(const MemberSet& a, const MemberSet& b);

/// |prev ∩ next| / |next|: share of `next` that came from `prev`.
double ancestor_fraction(const MemberSet& prev, const MemberSet& next);

/// |prev ∩ next| / |prev|: share of `prev` that moved into `next`.
double descendant_fraction(const MemberSet& prev, const MemberSet& next);

struct Match {
  int from = 0;  // community in window t
  int to = 0;    // community in window t+1
  double jaccard = 0.0;

  friend bool operator==(const Match&, const Match&) = default;
};

/// One-to-one matching of consecutive-window communities by highest Jaccard.
/// Conflicts go to the higher Jaccard (lower source id on exact ties); the
/// loser falls back to its next-best target. Pairs with Jaccard 0 never match.
/// Result is sorted by `from`.
std::vector<Match> match_partitions(const Partition& current, const Partition& next,
                                    double min_jaccard = 0.0);

enum class Relation { match, ancestor, descendant };

std::string_view to_string(Relation relation);

struct LineageEdge {
  std::size_t window = 0;  // source window; target lives in window + 1
  int from = 0;
  int to = 0;
  Relation relation = Relation::match;
  double value = 0.0;  // jaccard for match edges, the fraction otherwise

  friend bool operator==(const LineageEdge&, const LineageEdge&) = default;
};

/// Match/ancestor/descendant relations across a chronological window sequence.
class LineageGraph {
 public:
  LineageGraph() = default;
  LineageGraph(std::vector<std::size_t> community_counts, std::vector<LineageEdge> edges);

  std::size_t window_count() const { return community_counts_.size(); }
  std::size_t community_count(std::size_t window) const { return community_counts_.at(window); }
  const std::vector<LineageEdge>& edges() const { return edges_; }

  /// Match edge leaving `ref` (into window + 1), if any.
  std::optional<LineageEdge> match_from(CommunityRef ref) const;
  /// Match edge entering `ref` (from window - 1), if any.
  std::optional<LineageEdge> match_into(CommunityRef ref) const;
  bool matched(CommunityRef from, int to) const;
  bool exists(CommunityRef ref) const;

 private:
  std::vector<std::size_t> community_counts_;
  std::vector<LineageEdge> edges_;  // sorted by (window, from, relation, to)
  std::vector<std::vector<int>> match_out_;  // [window][community] -> target or -1
  std::vector<std::vector<int>> match_in_;
  std::vector<std::vector<double>> match_value_;
};

struct LineageOptions {
  /// Ancestor/descendant edges below this fraction are not stored.
  double min_annotated_fraction = 0.0;
  /// Optional match threshold; 0 keeps every positive-overlap match.
  double min_match_jaccard = 0.0;
};

/// Windows must be consecutive in the sense of the sequence built by
/// build_windows: each window starts after the previous one.
LineageGraph build_lineage(const std::vector<Partition>& partitions, const LineageOptions& options = {});

void write_lineage(std::ostream& out, const LineageGraph& lineage);

}  // namespace commtrace
