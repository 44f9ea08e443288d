#include "commtrace/viz.hpp"

#include <cmath>
#include <deque>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace commtrace {

namespace {

// Uniform [0, 1) from the top 53 bits; std::uniform_real_distribution is
// library-specific.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

double fr_natural_length(std::size_t n, double c) {
  if (n == 0) return 0.0;
  return c * std::sqrt(kLayoutAreaPerNode * static_cast<double>(n) / static_cast<double>(n));
}

LayoutState fr_layout(const SnapshotGraph& graph, const LayoutState& prior, const LayoutOptions& options) {
  if (options.iterations < 0) throw std::invalid_argument("negative iteration count");
  LayoutState out = prior;
  out.seed = options.seed;
  out.iterations = options.iterations;
  const auto n = graph.node_count();
  if (n == 0) return out;

  const double width = std::sqrt(kLayoutAreaPerNode * static_cast<double>(n));
  const double half = width / 2.0;
  const double k = fr_natural_length(n, options.c);
  std::mt19937_64 rng(options.seed);

  std::vector<Eigen::Vector2d> pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& author = graph.node(i);
    if (auto it = prior.positions.find(author); it != prior.positions.end()) {
      pos[i] = it->second;
      continue;
    }
    Eigen::Vector2d lo(-half, -half);
    Eigen::Vector2d hi(half, half);
    if (options.partition != nullptr) {
      if (auto c = options.partition->community_of(author)) {
        bool any = false;
        Eigen::Vector2d box_lo;
        Eigen::Vector2d box_hi;
        for (const auto& member : options.partition->members(*c)) {
          auto placed = prior.positions.find(member);
          if (placed == prior.positions.end()) continue;
          box_lo = any ? box_lo.cwiseMin(placed->second) : placed->second;
          box_hi = any ? box_hi.cwiseMax(placed->second) : placed->second;
          any = true;
        }
        if (any) {
          const Eigen::Vector2d pad = Eigen::Vector2d::Constant(0.1 * k);
          lo = box_lo - pad;
          hi = box_hi + pad;
        }
      }
    }
    const double x = unit(rng);
    const double y = unit(rng);
    pos[i] = lo + Eigen::Vector2d(x, y).cwiseProduct(hi - lo);
  }

  const double start_temperature = width / 10.0;
  std::vector<Eigen::Vector2d> disp(n);
  for (int iter = 0; iter < options.iterations; ++iter) {
    const double temperature =
        start_temperature * (1.0 - static_cast<double>(iter) / static_cast<double>(options.iterations));
    for (auto& d : disp) d.setZero();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        Eigen::Vector2d delta = pos[i] - pos[j];
        double dist = delta.norm();
        if (dist < 1e-9) {
          delta = Eigen::Vector2d(1e-2, 0.0);
          dist = 1e-2;
        }
        const Eigen::Vector2d push = delta / dist * (k * k / dist);
        disp[i] += push;
        disp[j] -= push;
      }
    }
    for (const auto& e : graph.edges()) {
      Eigen::Vector2d delta = pos[e.u] - pos[e.v];
      const double dist = delta.norm();
      if (dist < 1e-9) continue;
      const Eigen::Vector2d pull = delta / dist * (dist * dist / k);
      disp[e.u] -= pull;
      disp[e.v] += pull;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double length = disp[i].norm();
      if (length > 0.0) pos[i] += disp[i] / length * std::min(length, temperature);
      pos[i] = pos[i].cwiseMax(Eigen::Vector2d(-half, -half)).cwiseMin(Eigen::Vector2d(half, half));
    }
  }

  for (std::size_t i = 0; i < n; ++i) out.positions[graph.node(i)] = pos[i];
  return out;
}

std::map<CommunityRef, int> assign_colors(const LineageGraph& lineage) {
  std::map<CommunityRef, int> colors;
  int next = 0;
  for (std::size_t w = 0; w < lineage.window_count(); ++w) {
    for (std::size_t c = 0; c < lineage.community_count(w); ++c) {
      CommunityRef ref{w, static_cast<int>(c)};
      auto match = lineage.match_into(ref);
      colors[ref] = match ? colors.at({w - 1, match->from}) : next++;
    }
  }
  return colors;
}

void emit_snapshot_layout(std::ostream& out, const LayoutState& layout, const Partition& partition,
                          const std::map<AuthorId, double>& betweenness, const std::map<CommunityRef, int>& colors,
                          std::size_t window_index) {
  for (const auto& [author, community] : partition.assignment()) {
    auto p = layout.positions.find(author);
    if (p == layout.positions.end()) throw LookupError("no layout position for '" + author + "'");
    auto b = betweenness.find(author);
    if (b == betweenness.end()) throw LookupError("no betweenness for '" + author + "'");
    auto color = colors.find({window_index, community});
    if (color == colors.end()) throw LookupError(fmt::format("no colour for w{}:c{}", window_index, community));
    out << author << '\t' << format_fixed(p->second.x(), 6) << '\t' << format_fixed(p->second.y(), 6) << '\t'
        << format_fixed(std::log1p(b->second), 6) << '\t' << color->second << '\n';
  }
}

std::string percent_label(double fraction) { return format_trimmed(fraction * 100.0, 1) + "%"; }

namespace {

struct PairInfo {
  bool matched = false;
  std::optional<double> ancestor;
  std::optional<double> descendant;
};

enum class Style { solid, dashed, merge };

struct DrawnEdge {
  CommunityRef from;
  CommunityRef to;
  Style style;
  std::string label;
};

std::string node_id(CommunityRef ref) { return "\"" + to_string(ref) + "\""; }

}  // namespace

std::string emit_evolution_dot(const LineageGraph& lineage, const DiagramSpec& spec,
                               const std::vector<TemporalWindow>& windows) {
  if (spec.min_fraction < 0.0 || spec.min_fraction > 1.0) {
    throw std::invalid_argument("diagram min fraction must lie in [0, 1]");
  }
  for (const auto& f : spec.focus) {
    if (!lineage.exists(f)) throw LookupError("focus community " + to_string(f) + " does not exist");
  }
  const std::size_t first = spec.first_window.value_or(0);
  const std::size_t last = spec.last_window.value_or(lineage.window_count() == 0 ? 0 : lineage.window_count() - 1);

  std::map<std::pair<CommunityRef, int>, PairInfo> pairs;
  for (const auto& e : lineage.edges()) {
    auto& info = pairs[{CommunityRef{e.window, e.from}, e.to}];
    switch (e.relation) {
      case Relation::match:
        info.matched = true;
        break;
      case Relation::ancestor:
        info.ancestor = e.value;
        break;
      case Relation::descendant:
        info.descendant = e.value;
        break;
    }
  }

  std::vector<DrawnEdge> candidates;
  for (const auto& [key, info] : pairs) {
    const auto& [from, to_id] = key;
    CommunityRef to{from.window + 1, to_id};
    if (from.window < first || to.window > last) continue;
    if (info.matched) {
      if (info.ancestor && *info.ancestor >= spec.min_fraction) {
        candidates.push_back({from, to, Style::solid, percent_label(*info.ancestor)});
      }
    } else if (info.descendant && *info.descendant >= kMergeDescendantFraction) {
      if (*info.descendant >= spec.min_fraction) {
        auto formed = info.ancestor ? "(" + percent_label(*info.ancestor) + ")" : std::string();
        candidates.push_back({from, to, Style::merge, percent_label(*info.descendant) + formed});
      }
    } else if (info.ancestor && *info.ancestor >= spec.min_fraction) {
      candidates.push_back({from, to, Style::dashed, percent_label(*info.ancestor)});
    }
  }

  // Descendants forward and ancestors backward from each focus community.
  std::multimap<CommunityRef, std::size_t> outgoing;
  std::multimap<CommunityRef, std::size_t> incoming;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    outgoing.emplace(candidates[i].from, i);
    incoming.emplace(candidates[i].to, i);
  }
  std::set<std::size_t> kept;
  auto walk = [&](const std::multimap<CommunityRef, std::size_t>& adjacency, bool forward) {
    std::set<CommunityRef> seen(spec.focus.begin(), spec.focus.end());
    std::deque<CommunityRef> queue(spec.focus.begin(), spec.focus.end());
    while (!queue.empty()) {
      auto ref = queue.front();
      queue.pop_front();
      auto [lo, hi] = adjacency.equal_range(ref);
      for (auto it = lo; it != hi; ++it) {
        kept.insert(it->second);
        auto other = forward ? candidates[it->second].to : candidates[it->second].from;
        if (seen.insert(other).second) queue.push_back(other);
      }
    }
  };
  walk(outgoing, true);
  walk(incoming, false);

  std::map<std::size_t, std::set<CommunityRef>> ranks;
  for (auto i : kept) {
    ranks[candidates[i].from.window].insert(candidates[i].from);
    ranks[candidates[i].to.window].insert(candidates[i].to);
  }

  std::ostringstream dot;
  dot << "digraph evolution {\n";
  dot << "  rankdir=LR;\n";
  dot << "  node [shape=ellipse];\n";
  for (const auto& [window, refs] : ranks) {
    dot << "  { rank=same;";
    for (const auto& r : refs) dot << ' ' << node_id(r) << ';';
    dot << " }\n";
  }
  for (const auto& [window, refs] : ranks) {
    for (const auto& r : refs) {
      std::string when = window < windows.size() ? windows[window].label() : fmt::format("w{}", window);
      dot << "  " << node_id(r) << " [label=\"c" << r.community << "\\n" << when << "\"];\n";
    }
  }
  for (auto i : kept) {
    const auto& e = candidates[i];
    const char* style = e.style == Style::solid ? "solid" : e.style == Style::dashed ? "dashed" : "dashed,dotted";
    dot << "  " << node_id(e.from) << " -> " << node_id(e.to) << " [style=\"" << style << "\", label=\"" << e.label
        << "\"];\n";
  }
  dot << "}\n";
  return dot.str();
}

}  // namespace commtrace
