#include "commtrace/detect.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include <fmt/format.h>

#include "tsv.hpp"

namespace commtrace {

Partition::Partition(TemporalWindow window, const std::map<AuthorId, int>& assignment) : window_(window) {
  std::map<int, int> dense;
  for (const auto& [author, id] : assignment) dense.emplace(id, 0);
  int next = 0;
  for (auto& [id, slot] : dense) slot = next++;
  communities_.resize(dense.size());
  for (const auto& [author, id] : assignment) {
    int c = dense.at(id);
    assignment_.emplace(author, c);
    communities_[c].push_back(author);  // map order keeps these sorted
  }
}

Partition Partition::from_communities(TemporalWindow window, std::vector<MemberSet> communities) {
  Partition p;
  p.window_ = window;
  for (std::size_t c = 0; c < communities.size(); ++c) {
    auto& members = communities[c];
    members = make_member_set(std::move(members));
    if (members.empty()) throw std::invalid_argument("empty community");
    for (const auto& a : members) {
      if (!p.assignment_.emplace(a, static_cast<int>(c)).second) {
        throw std::invalid_argument("author '" + a + "' in two communities");
      }
    }
  }
  p.communities_ = std::move(communities);
  return p;
}

Partition Partition::canonical(TemporalWindow window, std::vector<MemberSet> communities) {
  for (auto& c : communities) c = make_member_set(std::move(c));
  std::erase_if(communities, [](const MemberSet& c) { return c.empty(); });
  std::sort(communities.begin(), communities.end(),
            [](const MemberSet& a, const MemberSet& b) { return a.front() < b.front(); });
  return from_communities(window, std::move(communities));
}

const MemberSet& Partition::members(int community) const {
  if (community < 0 || static_cast<std::size_t>(community) >= communities_.size()) {
    throw LookupError(fmt::format("no community {} in window {}", community, window_.label()));
  }
  return communities_[community];
}

std::optional<int> Partition::community_of(const AuthorId& author) const {
  auto it = assignment_.find(author);
  if (it == assignment_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------

double modularity(const SnapshotGraph& graph, const std::vector<int>& community_of_node, double resolution) {
  const double m = graph.total_weight();
  if (m <= 0.0) return 0.0;
  if (community_of_node.size() != graph.node_count()) {
    throw std::invalid_argument("community vector does not cover the graph");
  }
  int k = 0;
  for (int c : community_of_node) k = std::max(k, c + 1);
  std::vector<double> internal(k, 0.0);
  std::vector<double> total(k, 0.0);
  for (const auto& e : graph.edges()) {
    if (community_of_node[e.u] == community_of_node[e.v]) internal[community_of_node[e.u]] += e.weight;
  }
  for (std::size_t i = 0; i < graph.node_count(); ++i) total[community_of_node[i]] += graph.strength(i);
  double q = 0.0;
  for (int c = 0; c < k; ++c) {
    double share = total[c] / (2.0 * m);
    q += internal[c] / m - resolution * share * share;
  }
  return q;
}

double modularity(const SnapshotGraph& graph, const Partition& partition, double resolution) {
  if (partition.author_count() != graph.node_count()) {
    throw std::invalid_argument("partition does not cover the graph's nodes");
  }
  std::vector<int> labels(graph.node_count());
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    auto c = partition.community_of(graph.node(i));
    if (!c) throw std::invalid_argument("node '" + graph.node(i) + "' missing from partition");
    labels[i] = *c;
  }
  return modularity(graph, labels, resolution);
}

Partition singleton_partition(const SnapshotGraph& graph) {
  std::vector<MemberSet> communities;
  communities.reserve(graph.node_count());
  for (const auto& a : graph.nodes()) communities.push_back({a});
  return Partition::from_communities(graph.window(), std::move(communities));
}

namespace {

// Working graph for one Louvain level. Self-loop weight holds the weight of
// edges collapsed inside an aggregated node (each counted once).
struct LevelGraph {
  std::vector<std::vector<Neighbor>> adjacency;  // no self entries
  std::vector<double> self_loop;
  std::vector<double> degree;
  double total = 0.0;  // m
};

LevelGraph level_from(const SnapshotGraph& graph) {
  LevelGraph g;
  const auto n = graph.node_count();
  g.adjacency.resize(n);
  g.self_loop.assign(n, 0.0);
  g.degree.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    g.adjacency[i] = graph.neighbors(i);
    g.degree[i] = graph.strength(i);
  }
  g.total = graph.total_weight();
  return g;
}

void shuffle_order(std::vector<std::size_t>& order, std::mt19937_64& rng) {
  // Hand-rolled Fisher-Yates: std::shuffle's output is library-specific.
  for (std::size_t i = order.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
}

// Returns true if any node moved.
bool local_moving(const LevelGraph& g, std::vector<int>& community, double resolution, std::mt19937_64& rng) {
  constexpr double kEps = 1e-12;
  const auto n = g.adjacency.size();
  const double two_m = 2.0 * g.total;
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[community[i]] += g.degree[i];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle_order(order, rng);

  std::vector<double> link(n, 0.0);
  std::vector<char> seen(n, 0);
  std::vector<int> touched;
  bool any_move = false;
  bool improved = true;
  while (improved) {
    improved = false;
    for (auto node : order) {
      const int own = community[node];
      const double k = g.degree[node];
      touched.clear();
      touched.push_back(own);
      seen[own] = 1;
      for (const auto& nb : g.adjacency[node]) {
        int c = community[nb.node];
        if (!seen[c]) {
          seen[c] = 1;
          touched.push_back(c);
        }
        link[c] += nb.weight;
      }
      tot[own] -= k;
      auto gain = [&](int c) { return link[c] - resolution * tot[c] * k / two_m; };
      const double stay = gain(own);
      double best_gain = stay;
      for (int c : touched) best_gain = std::max(best_gain, gain(c));
      int target = own;
      if (best_gain > stay + kEps) {
        target = std::numeric_limits<int>::max();
        for (int c : touched) {
          if (gain(c) >= best_gain - kEps) target = std::min(target, c);
        }
      }
      tot[target] += k;
      for (int c : touched) {
        link[c] = 0.0;
        seen[c] = 0;
      }
      if (target != own) {
        community[node] = target;
        improved = true;
        any_move = true;
      }
    }
  }
  return any_move;
}

// Renumbers communities densely by first occurrence and returns the count.
int renumber(std::vector<int>& community) {
  std::vector<int> remap(community.size(), -1);
  int next = 0;
  for (auto& c : community) {
    if (remap[c] < 0) remap[c] = next++;
    c = remap[c];
  }
  return next;
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<int>& community, int count) {
  LevelGraph out;
  out.adjacency.resize(count);
  out.self_loop.assign(count, 0.0);
  out.degree.assign(count, 0.0);
  out.total = g.total;
  std::vector<std::map<int, double>> links(count);
  for (std::size_t i = 0; i < g.adjacency.size(); ++i) {
    const int ci = community[i];
    out.self_loop[ci] += g.self_loop[i];
    out.degree[ci] += g.degree[i];
    for (const auto& nb : g.adjacency[i]) {
      const int cj = community[nb.node];
      if (ci == cj) {
        if (i < nb.node) out.self_loop[ci] += nb.weight;
      } else {
        links[ci][cj] += nb.weight;
      }
    }
  }
  for (int c = 0; c < count; ++c) {
    for (const auto& [d, w] : links[c]) out.adjacency[c].push_back({static_cast<std::size_t>(d), w});
  }
  return out;
}

}  // namespace

Partition louvain_detect(const SnapshotGraph& graph, const LouvainOptions& options) {
  if (graph.node_count() == 0) throw std::invalid_argument("louvain_detect on an empty graph");
  if (graph.total_weight() <= 0.0) return singleton_partition(graph);

  std::mt19937_64 rng(options.seed);
  LevelGraph level = level_from(graph);
  std::vector<int> node_community(graph.node_count());
  std::iota(node_community.begin(), node_community.end(), 0);

  for (int depth = 0; depth < options.max_levels; ++depth) {
    std::vector<int> community(level.adjacency.size());
    std::iota(community.begin(), community.end(), 0);
    if (!local_moving(level, community, options.resolution, rng)) break;
    int count = renumber(community);
    for (auto& c : node_community) c = community[c];
    if (static_cast<std::size_t>(count) == level.adjacency.size()) break;
    level = aggregate(level, community, count);
  }

  std::vector<MemberSet> groups(graph.node_count());
  for (std::size_t i = 0; i < graph.node_count(); ++i) groups[node_community[i]].push_back(graph.node(i));
  auto result = Partition::canonical(graph.window(), std::move(groups));

  auto singletons = singleton_partition(graph);
  if (modularity(graph, result, options.resolution) < modularity(graph, singletons, options.resolution)) {
    return singletons;
  }
  return result;
}

// ---------------------------------------------------------------------------

void write_partition(std::ostream& out, const Partition& partition) {
  for (const auto& [author, c] : partition.assignment()) out << author << '\t' << c << '\n';
}

Partition read_partition(std::istream& in, const TemporalWindow& window, const SnapshotGraph* graph,
                         const std::string& source) {
  std::map<AuthorId, int> assignment;
  std::string line;
  std::size_t line_no = 0;
  while (tsv::next_record(in, line, line_no)) {
    auto fields = tsv::split(line, '\t');
    if (fields.size() != 2) {
      throw FormatError(source, line_no, fmt::format("expected 2 columns, found {}", fields.size()));
    }
    auto author = std::string(tsv::trim(fields[0]));
    auto id = tsv::parse_int<int>(fields[1]);
    if (author.empty()) throw FormatError(source, line_no, "empty author id");
    if (!id || *id < 0) throw FormatError(source, line_no, "bad community id '" + fields[1] + "'");
    if (graph != nullptr && !graph->index_of(author)) {
      throw FormatError(source, line_no, "unknown author id '" + author + "'");
    }
    auto [it, inserted] = assignment.emplace(author, *id);
    if (!inserted && it->second != *id) {
      throw FormatError(source, line_no,
                        fmt::format("author '{}' assigned to communities {} and {}", author, it->second, *id));
    }
  }
  Partition base(window, assignment);
  if (graph == nullptr || base.author_count() == graph->node_count()) return base;

  auto communities = base.communities();
  for (const auto& a : graph->nodes()) {
    if (!assignment.contains(a)) communities.push_back({a});
  }
  return Partition::from_communities(window, std::move(communities));
}

}  // namespace commtrace
