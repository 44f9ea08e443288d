#include "commtrace/lifecycle.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <thread>

namespace commtrace {

namespace {

// Single-source Brandes pass; adds the source's dependencies into `acc`.
class BrandesPass {
 public:
  BrandesPass(const SnapshotGraph& graph, PathLength length)
      : graph_(graph),
        length_(length),
        dist_(graph.node_count()),
        sigma_(graph.node_count()),
        delta_(graph.node_count()),
        preds_(graph.node_count()) {}

  void run(std::size_t source, std::vector<double>& acc) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::fill(dist_.begin(), dist_.end(), kInf);
    std::fill(sigma_.begin(), sigma_.end(), 0.0);
    std::fill(delta_.begin(), delta_.end(), 0.0);
    for (auto& p : preds_) p.clear();
    order_.clear();

    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist_[source] = 0.0;
    sigma_[source] = 1.0;
    queue.push({0.0, source});
    while (!queue.empty()) {
      auto [d, v] = queue.top();
      queue.pop();
      if (d > dist_[v]) continue;
      order_.push_back(v);
      for (const auto& nb : graph_.neighbors(v)) {
        const double len = length_ == PathLength::hops ? 1.0 : 1.0 / nb.weight;
        const double candidate = d + len;
        const double tol = 1e-12 * std::max(1.0, candidate);
        const auto w = nb.node;
        if (candidate < dist_[w] - tol) {
          dist_[w] = candidate;
          sigma_[w] = sigma_[v];
          preds_[w].assign(1, v);
          queue.push({candidate, w});
        } else if (std::abs(candidate - dist_[w]) <= tol) {
          sigma_[w] += sigma_[v];
          preds_[w].push_back(v);
        }
      }
    }
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      const auto w = *it;
      for (auto v : preds_[w]) delta_[v] += sigma_[v] / sigma_[w] * (1.0 + delta_[w]);
      if (w != source) acc[w] += delta_[w];
    }
  }

 private:
  const SnapshotGraph& graph_;
  PathLength length_;
  std::vector<double> dist_;
  std::vector<double> sigma_;
  std::vector<double> delta_;
  std::vector<std::vector<std::size_t>> preds_;
  std::vector<std::size_t> order_;
};

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double population_variance(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  const double mu = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return s / static_cast<double>(xs.size());
}

}  // namespace

std::vector<double> vertex_betweenness(const SnapshotGraph& graph, const BetweennessOptions& options) {
  const auto n = graph.node_count();
  // Sources are split into fixed blocks whose partial sums are reduced in
  // block order, so the result does not depend on the thread count.
  constexpr std::size_t kBlock = 64;
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> partial(blocks, std::vector<double>(n, 0.0));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    BrandesPass pass(graph, options.length);
    for (std::size_t b = next++; b < blocks; b = next++) {
      for (std::size_t s = b * kBlock; s < std::min(n, (b + 1) * kBlock); ++s) pass.run(s, partial[b]);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(blocks)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  std::vector<double> out(n, 0.0);
  for (const auto& block : partial) {
    for (std::size_t i = 0; i < n; ++i) out[i] += block[i];
  }
  for (auto& x : out) x /= 2.0;  // undirected: each pair seen from both ends
  return out;
}

double author_entropy(const MemberSet& previous, const Partition& next) {
  std::map<int, std::size_t> counts;
  std::size_t survivors = 0;
  for (const auto& a : previous) {
    if (auto c = next.community_of(a)) {
      ++counts[*c];
      ++survivors;
    }
  }
  if (survivors == 0 || counts.size() <= 1) return 0.0;
  double h = 0.0;
  for (const auto& [c, count] : counts) {
    const double f = static_cast<double>(count) / static_cast<double>(survivors);
    h -= f * std::log(f);
  }
  return std::clamp(h / std::log(static_cast<double>(counts.size())), 0.0, 1.0);
}

double relative_density(const SnapshotGraph& graph, const MemberSet& members, DensityMode mode) {
  if (members.empty()) throw std::invalid_argument("relative density of an empty community");
  std::vector<char> inside(graph.node_count(), 0);
  for (const auto& a : members) {
    auto index = graph.index_of(a);
    if (!index) throw std::invalid_argument("community member '" + a + "' is not a graph node");
    inside[*index] = 1;
  }
  double internal = 0.0;
  double boundary = 0.0;
  for (const auto& e : graph.edges()) {
    const bool iu = inside[e.u] != 0;
    const bool iv = inside[e.v] != 0;
    if (iu && iv) {
      internal += e.weight;
    } else if (iu || iv) {
      boundary += e.weight;
    }
  }
  if (mode == DensityMode::degree) internal *= 2.0;
  const double incident = internal + boundary;
  if (incident <= 0.0) return 1.0;
  return internal / incident;
}

Measured topic_drift(const TermVector& previous_centroid, const TermVector& next_centroid) {
  if (previous_centroid.norm() == 0.0 || next_centroid.norm() == 0.0) return {0.0, true};
  return {std::clamp(cosine_similarity(previous_centroid, next_centroid), 0.0, 1.0), false};
}

Measured cluster_content_ratio(const MemberSet& members, const AuthorVectors& vectors,
                               const MemberSet& network_authors) {
  if (members.empty()) throw std::invalid_argument("content ratio of an empty community");
  const TermVector own = centroid(members, vectors);
  double intra = 0.0;
  for (const auto& a : members) intra += cosine_similarity(vectors.weights_of(a), own);
  intra /= static_cast<double>(members.size());
  const double external = network_authors.empty() ? 0.0 : cosine_similarity(own, centroid(network_authors, vectors));
  if (external <= 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {intra / external, false};
}

// ---------------------------------------------------------------------------

const TermVector& WindowSeries::centroid_of(CommunityRef ref) const {
  if (ref.window >= centroids.size() || ref.community < 0 ||
      static_cast<std::size_t>(ref.community) >= centroids[ref.window].size()) {
    throw LookupError("no centroid for " + to_string(ref));
  }
  return centroids[ref.window][ref.community];
}

const MemberSet& WindowSeries::members(CommunityRef ref) const {
  if (ref.window >= partitions.size()) throw LookupError("no window for " + to_string(ref));
  return partitions[ref.window].members(ref.community);
}

WindowSeries make_series(std::vector<SnapshotGraph> graphs, std::vector<Partition> partitions,
                         std::vector<AuthorVectors> vectors, const SeriesOptions& options) {
  if (graphs.size() != partitions.size() || vectors.size() != partitions.size()) {
    throw std::invalid_argument("graphs, partitions and vectors must cover the same windows");
  }
  WindowSeries series;
  series.graphs = std::move(graphs);
  series.partitions = std::move(partitions);
  series.vectors = std::move(vectors);
  series.lineage = build_lineage(series.partitions, options.lineage);
  for (std::size_t w = 0; w < series.partitions.size(); ++w) {
    series.betweenness.push_back(vertex_betweenness(series.graphs[w], options.betweenness));
    std::vector<TermVector> cs;
    for (const auto& members : series.partitions[w].communities()) cs.push_back(centroid(members, series.vectors[w]));
    series.centroids.push_back(std::move(cs));
  }
  return series;
}

LifecycleProfile lifecycle_profile(const WindowSeries& series, CommunityRef ref, DensityMode density) {
  if (!series.lineage.exists(ref)) throw LookupError("no community " + to_string(ref));
  const auto& graph = series.graphs[ref.window];
  const auto& members = series.members(ref);
  LifecycleProfile p;
  p.community = ref;
  p.size = members.size();
  double b = 0.0;
  for (const auto& a : members) {
    if (auto index = graph.index_of(a)) b += series.betweenness[ref.window][*index];
  }
  p.avg_betweenness = b / static_cast<double>(members.size());
  p.density = relative_density(graph, members, density);
  p.content_ratio = cluster_content_ratio(members, series.vectors[ref.window], graph.nodes());
  if (auto match = series.lineage.match_into(ref)) {
    CommunityRef prev{ref.window - 1, match->from};
    p.entropy = author_entropy(series.members(prev), series.partitions[ref.window]);
    p.drift = topic_drift(series.centroid_of(prev), series.centroid_of(ref));
  }
  return p;
}

std::vector<LifecycleProfile> lifecycle_profiles(const WindowSeries& series, DensityMode density) {
  std::vector<LifecycleProfile> out;
  for (std::size_t w = 0; w < series.window_count(); ++w) {
    for (std::size_t c = 0; c < series.partitions[w].community_count(); ++c) {
      out.push_back(lifecycle_profile(series, {w, static_cast<int>(c)}, density));
    }
  }
  return out;
}

ClusteringAssessment assess_clustering(const SnapshotGraph& graph, const Partition& partition,
                                       const AuthorVectors& vectors, const std::vector<double>& entropies) {
  ClusteringAssessment out;
  out.window = partition.window();
  out.communities = partition.community_count();
  out.modularity = modularity(graph, partition);
  std::vector<double> hs;
  for (const auto& members : partition.communities()) {
    auto h = cluster_content_ratio(members, vectors, graph.nodes());
    if (!h.degenerate && std::isfinite(h.value)) hs.push_back(h.value);
  }
  out.mean_h = mean(hs);
  out.var_h = population_variance(hs);
  if (!entropies.empty()) {
    out.mean_a = mean(entropies);
    out.var_a = population_variance(entropies);
  }
  return out;
}

std::vector<ClusteringAssessment> assess_series(const WindowSeries& series) {
  std::vector<ClusteringAssessment> out;
  for (std::size_t w = 0; w < series.window_count(); ++w) {
    std::vector<double> entropies;
    if (w > 0) {
      for (const auto& prev : series.partitions[w - 1].communities()) {
        entropies.push_back(author_entropy(prev, series.partitions[w]));
      }
    }
    out.push_back(assess_clustering(series.graphs[w], series.partitions[w], series.vectors[w], entropies));
  }
  return out;
}

namespace {

std::string real_or_na(const std::optional<double>& value) {
  return value ? format_fixed(*value, 5) : "NA";
}

}  // namespace

void write_profiles(std::ostream& out, const std::vector<LifecycleProfile>& profiles) {
  out << "window_idx\tcommunity_id\tS\tB\tA\trho\tT\tH\n";
  for (const auto& p : profiles) {
    out << p.community.window << '\t' << p.community.community << '\t' << p.size << '\t'
        << format_fixed(p.avg_betweenness, 5) << '\t' << real_or_na(p.entropy) << '\t' << format_fixed(p.density, 5)
        << '\t' << (p.drift ? format_fixed(p.drift->value, 5) : "NA") << '\t'
        << format_fixed(p.content_ratio.value, 5) << '\n';
  }
}

void write_assessment(std::ostream& out, const std::vector<ClusteringAssessment>& rows) {
  out << "window_idx\twindow\tcommunities\tQ\tvar_Q\tmean_H\tvar_H\tmean_A\tvar_A\n";
  std::vector<double> qs;
  std::vector<double> hs;
  std::vector<double> as;
  for (std::size_t w = 0; w < rows.size(); ++w) {
    const auto& r = rows[w];
    out << w << '\t' << r.window.label() << '\t' << r.communities << '\t' << format_fixed(r.modularity, 5)
        << "\tNA\t" << format_fixed(r.mean_h, 5) << '\t' << format_fixed(r.var_h, 5) << '\t' << real_or_na(r.mean_a)
        << '\t' << real_or_na(r.var_a) << '\n';
    qs.push_back(r.modularity);
    hs.push_back(r.mean_h);
    if (r.mean_a) as.push_back(*r.mean_a);
  }
  // Overall row: averages of the per-window values, variance across windows.
  if (rows.empty()) return;
  std::size_t total = 0;
  for (const auto& r : rows) total += r.communities;
  out << "all\t" << rows.front().window.start_year << "–" << rows.back().window.end_year << '\t' << total << '\t'
      << format_fixed(mean(qs), 5) << '\t' << format_fixed(population_variance(qs), 5) << '\t'
      << format_fixed(mean(hs), 5) << '\t' << format_fixed(population_variance(hs), 5) << '\t'
      << (as.empty() ? std::string("NA") : format_fixed(mean(as), 5)) << '\t'
      << (as.empty() ? std::string("NA") : format_fixed(population_variance(as), 5)) << '\n';
}

}  // namespace commtrace
