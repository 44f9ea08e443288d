#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "commtrace/common.hpp"
#include "commtrace/netbuild.hpp"

namespace commtrace {

/// Non-overlapping assignment of a window's authors to communities with dense
/// ids 0..k-1 and no empty community.
class Partition {
 public:
  Partition() = default;

  /// Community ids are renumbered densely in ascending order of the given ids.
  Partition(TemporalWindow window, const std::map<AuthorId, int>& assignment);

  /// Community i gets id i. Sets must be disjoint and non-empty.
  static Partition from_communities(TemporalWindow window, std::vector<MemberSet> communities);

  /// Ids ordered by each community's smallest author id.
  static Partition canonical(TemporalWindow window, std::vector<MemberSet> communities);

  const TemporalWindow& window() const { return window_; }
  std::size_t community_count() const { return communities_.size(); }
  const std::vector<MemberSet>& communities() const { return communities_; }
  const MemberSet& members(int community) const;
  const std::map<AuthorId, int>& assignment() const { return assignment_; }
  std::optional<int> community_of(const AuthorId& author) const;
  std::size_t author_count() const { return assignment_.size(); }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  TemporalWindow window_;
  std::map<AuthorId, int> assignment_;
  std::vector<MemberSet> communities_;
};

/// Newman-Girvan modularity, optionally with a resolution factor on the null
/// model term. Zero-weight graphs score 0.
double modularity(const SnapshotGraph& graph, const Partition& partition, double resolution = 1.0);

/// Same quantity from a per-node community vector aligned with graph indices.
double modularity(const SnapshotGraph& graph, const std::vector<int>& community_of_node,
                  double resolution = 1.0);

struct LouvainOptions {
  std::uint64_t seed = 0;
  double resolution = 1.0;
  int max_levels = 64;
};

/// Greedy local moving + aggregation. Deterministic for a fixed seed.
Partition louvain_detect(const SnapshotGraph& graph, const LouvainOptions& options = {});

Partition singleton_partition(const SnapshotGraph& graph);

void write_partition(std::ostream& out, const Partition& partition);

/// Reads `author<TAB>community` rows. With `graph`, ids outside the graph
/// are rejected and graph nodes absent from the file become singletons.
Partition read_partition(std::istream& in, const TemporalWindow& window, const SnapshotGraph* graph = nullptr,
                         const std::string& source = "partition.tsv");

}  // namespace commtrace
