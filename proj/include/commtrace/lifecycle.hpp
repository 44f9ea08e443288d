#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "commtrace/detect.hpp"
#include "commtrace/netbuild.hpp"
#include "commtrace/topics.hpp"
#include "commtrace/track.hpp"

namespace commtrace {

enum class PathLength {
  inverse_weight,  // edge length 1/w: strong co-citation = short hop
  hops,            // every edge has length 1
};

struct BetweennessOptions {
  PathLength length = PathLength::inverse_weight;
  unsigned threads = 1;
};

/// Exact shortest-path betweenness (Brandes), unnormalized, each unordered
/// pair counted once and split evenly over equal-length shortest paths.
/// Result is index-aligned with graph.nodes().
std::vector<double> vertex_betweenness(const SnapshotGraph& graph, const BetweennessOptions& options = {});

/// Normalized dispersion of `previous` members over the clusters of `next`.
/// 0 when survivors land in at most one cluster or nobody survives.
double author_entropy(const MemberSet& previous, const Partition& next);

enum class DensityMode {
  edge_set,  // internal weight / weight of all incident edges, each edge once
  degree,    // internal edges counted from both endpoints
};

/// Relative density; 1 for a community with no incident edges.
double relative_density(const SnapshotGraph& graph, const MemberSet& members,
                        DensityMode mode = DensityMode::edge_set);

/// A value together with a flag for inputs where the measure degenerates.
struct Measured {
  double value = 0.0;
  bool degenerate = false;
};

/// Cosine similarity of consecutive centroids (1 = unchanged topic).
/// Zero centroids give 0 with the degenerate flag.
Measured topic_drift(const TermVector& previous_centroid, const TermVector& next_centroid);

/// I/E: mean member-to-centroid cosine over centroid-to-network cosine.
/// E = 0 yields +inf flagged degenerate.
Measured cluster_content_ratio(const MemberSet& members, const AuthorVectors& vectors,
                               const MemberSet& network_authors);

/// Everything the per-community measures read, for one run of windows.
struct WindowSeries {
  std::vector<SnapshotGraph> graphs;
  std::vector<Partition> partitions;
  std::vector<AuthorVectors> vectors;
  LineageGraph lineage;
  std::vector<std::vector<double>> betweenness;  // per window, aligned with graph nodes
  std::vector<std::vector<TermVector>> centroids;  // per window, per community

  std::size_t window_count() const { return partitions.size(); }
  const TermVector& centroid_of(CommunityRef ref) const;
  const MemberSet& members(CommunityRef ref) const;
};

struct SeriesOptions {
  BetweennessOptions betweenness;
  LineageOptions lineage;
};

/// Fills lineage, betweenness and centroids from graphs, partitions and vectors.
WindowSeries make_series(std::vector<SnapshotGraph> graphs, std::vector<Partition> partitions,
                         std::vector<AuthorVectors> vectors, const SeriesOptions& options = {});

struct LifecycleProfile {
  CommunityRef community;
  std::size_t size = 0;
  double avg_betweenness = 0.0;
  std::optional<double> entropy;  // needs a match from the previous window
  double density = 1.0;
  std::optional<Measured> drift;  // needs a match from the previous window
  Measured content_ratio;
};

LifecycleProfile lifecycle_profile(const WindowSeries& series, CommunityRef community,
                                   DensityMode density = DensityMode::edge_set);
std::vector<LifecycleProfile> lifecycle_profiles(const WindowSeries& series,
                                                 DensityMode density = DensityMode::edge_set);

struct ClusteringAssessment {
  TemporalWindow window;
  std::size_t communities = 0;
  double modularity = 0.0;
  double mean_h = 0.0;
  double var_h = 0.0;
  std::optional<double> mean_a;
  std::optional<double> var_a;
};

/// Q plus mean/population variance of H over communities with finite H, and of
/// the supplied entropy values (when any).
ClusteringAssessment assess_clustering(const SnapshotGraph& graph, const Partition& partition,
                                       const AuthorVectors& vectors, const std::vector<double>& entropies = {});

/// Per-window assessments; entropies of window t are the dispersions of every
/// window t-1 community over partition t.
std::vector<ClusteringAssessment> assess_series(const WindowSeries& series);

void write_profiles(std::ostream& out, const std::vector<LifecycleProfile>& profiles);
void write_assessment(std::ostream& out, const std::vector<ClusteringAssessment>& rows);

}  // namespace commtrace
