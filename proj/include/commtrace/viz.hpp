#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "commtrace/detect.hpp"
#include "commtrace/netbuild.hpp"
#include "commtrace/track.hpp"

namespace commtrace {

/// Node coordinates carried from window to window.
struct LayoutState {
  std::map<AuthorId, Eigen::Vector2d> positions;
  std::uint64_t seed = 0;
  int iterations = 0;
};

struct LayoutOptions {
  std::uint64_t seed = 0;
  int iterations = 200;
  /// Scales the natural edge length k = C * sqrt(area / n).
  double c = 1.0;
  /// Optional community context for placing new nodes near their community.
  const Partition* partition = nullptr;
};

/// Area-per-node used for the layout frame (n * 1e4 square units).
inline constexpr double kLayoutAreaPerNode = 1e4;

/// Fruchterman-Reingold with linear cooling. Returning nodes start from their
/// prior coordinates; new nodes are placed at seeded random positions. Prior
/// nodes missing from `graph` are carried through untouched.
LayoutState fr_layout(const SnapshotGraph& graph, const LayoutState& prior, const LayoutOptions& options);

/// Natural length k for a graph of `n` nodes.
double fr_natural_length(std::size_t n, double c = 1.0);

/// Colour ids shared along match chains; each new line gets the next id.
std::map<CommunityRef, int> assign_colors(const LineageGraph& lineage);

/// Rows `author<TAB>x<TAB>y<TAB>size<TAB>color_id` with size = ln(1 + betweenness).
void emit_snapshot_layout(std::ostream& out, const LayoutState& layout, const Partition& partition,
                          const std::map<AuthorId, double>& betweenness, const std::map<CommunityRef, int>& colors,
                          std::size_t window_index);

struct DiagramSpec {
  std::vector<CommunityRef> focus;
  double min_fraction = 0.0;
  std::optional<std::size_t> first_window;
  std::optional<std::size_t> last_window;
};

/// Percentage rounded to the nearest tenth, e.g. 0.20149 -> "20.1%".
std::string percent_label(double fraction);

/// Cross-line edges with descendant fraction at or above this are drawn as merges.
inline constexpr double kMergeDescendantFraction = 0.5;

/// Evolution diagram around the focus communities as a DOT digraph.
/// Match edges are solid, ancestor edges dashed and merges dash-dotted with
/// "moved(formed)" labels.
std::string emit_evolution_dot(const LineageGraph& lineage, const DiagramSpec& spec,
                               const std::vector<TemporalWindow>& windows = {});

}  // namespace commtrace
