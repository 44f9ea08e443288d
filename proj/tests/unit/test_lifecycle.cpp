#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "commtrace/lifecycle.hpp"
#include "oracles.hpp"

using namespace commtrace;

namespace {

const TemporalWindow kW(2000, 2000);

SnapshotGraph graph(const SnapshotGraph::EdgeMap& edges, std::vector<AuthorId> extra = {}, int year = 2000) {
  return SnapshotGraph(TemporalWindow(year, year), edges, std::move(extra));
}

double at(const SnapshotGraph& g, const std::vector<double>& b, const AuthorId& a) { return b[*g.index_of(a)]; }

TermVector vec(std::initializer_list<double> values) {
  TermVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) {
    if (x != 0.0) v.insert(i) = x;
    ++i;
  }
  return v;
}

AuthorVectors vectors_of(const std::map<AuthorId, TermVector>& weights, int year = 2000) {
  AuthorVectors out(TemporalWindow(year, year), std::size_t(weights.begin()->second.size()));
  for (const auto& [a, w] : weights) out.insert(a, w, w);
  return out;
}

SnapshotGraph random_tree(std::mt19937_64& rng, std::size_t n) {
  SnapshotGraph::EdgeMap edges;
  for (std::size_t i = 1; i < n; ++i) edges[{oracle::node_name(rng() % i), oracle::node_name(i)}] = 1.0;
  return graph(edges);
}

}  // namespace

TEST_CASE("betweenness examples") {
  auto path = graph({{{"a", "b"}, 1}, {{"b", "c"}, 1}});
  auto b = vertex_betweenness(path);
  CHECK(at(path, b, "b") == 1.0);
  CHECK(at(path, b, "a") == 0.0);
  CHECK(at(path, b, "c") == 0.0);

  auto star = graph({{{"s", "x"}, 1}, {{"s", "y"}, 1}, {{"s", "z"}, 1}});
  CHECK(at(star, vertex_betweenness(star), "s") == 3.0);

  SnapshotGraph::EdgeMap k5;
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) k5[{oracle::node_name(i), oracle::node_name(j)}] = 1.0;
  }
  for (double x : vertex_betweenness(graph(k5))) CHECK(x == 0.0);

  auto isolated = graph({{{"a", "b"}, 1}}, {"q"});
  CHECK(at(isolated, vertex_betweenness(isolated), "q") == 0.0);
}

TEST_CASE("betweenness: weights shorten paths") {
  // Strong a-b and b-c links, weak direct a-c link.
  auto g = graph({{{"a", "b"}, 4}, {{"b", "c"}, 4}, {{"a", "c"}, 1}});
  // Lengths: a-b 0.25, b-c 0.25, a-c 1 => a..c goes through b.
  CHECK(at(g, vertex_betweenness(g), "b") == 1.0);
  CHECK(at(g, vertex_betweenness(g, {.length = PathLength::hops}), "b") == 0.0);
}

TEST_CASE("betweenness: even split over equal shortest paths") {
  // Square a-b-d, a-c-d.
  auto g = graph({{{"a", "b"}, 1}, {{"a", "c"}, 1}, {{"b", "d"}, 1}, {{"c", "d"}, 1}});
  auto b = vertex_betweenness(g);
  for (const char* n : {"a", "b", "c", "d"}) CHECK(at(g, b, n) == 0.5);
}

TEST_CASE("betweenness agrees with path enumeration") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = oracle::random_graph(rng, 2 + rng() % 10, 0.35, {1.0, 2.0, 4.0});
    auto fast = vertex_betweenness(g);
    auto slow = oracle::enumerated_betweenness(g);
    for (std::size_t i = 0; i < fast.size(); ++i) CHECK(std::abs(fast[i] - slow[i]) <= 1e-9);
    auto hops = vertex_betweenness(g, {.length = PathLength::hops});
    auto hops_slow = oracle::enumerated_betweenness(g, true);
    for (std::size_t i = 0; i < hops.size(); ++i) CHECK(std::abs(hops[i] - hops_slow[i]) <= 1e-9);
  }
}

TEST_CASE("betweenness on trees sums the interior nodes of every path") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng() % 11;
    auto t = random_tree(rng, n);
    double total = 0.0;
    for (double x : vertex_betweenness(t)) total += x;
    // Interior nodes on the s-t path = hop distance - 1; get distances by BFS.
    double expected = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<int> dist(n, -1);
      std::vector<std::size_t> queue{s};
      dist[s] = 0;
      for (std::size_t q = 0; q < queue.size(); ++q) {
        for (const auto& [v, w] : t.neighbors(queue[q])) {
          (void)w;
          if (dist[v] < 0) {
            dist[v] = dist[queue[q]] + 1;
            queue.push_back(v);
          }
        }
      }
      for (std::size_t u = s + 1; u < n; ++u) expected += dist[u] - 1;
    }
    CHECK(total == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("betweenness is thread-count independent") {
  std::mt19937_64 rng(30);
  auto g = oracle::random_graph(rng, 120, 0.05, {1.0, 2.0, 3.0});
  auto one = vertex_betweenness(g, {.threads = 1});
  CHECK(vertex_betweenness(g, {.threads = 4}) == one);
  CHECK(vertex_betweenness(g, {.threads = 0}) == one);
}

TEST_CASE("author entropy") {
  auto next = Partition::from_communities(kW, {{"a", "b"}, {"c", "d"}, {"e"}});
  CHECK(author_entropy({"a", "b"}, next) == 0.0);
  CHECK(author_entropy({"a", "b", "c", "d"}, next) == doctest::Approx(1.0).epsilon(1e-12));
  auto split31 = Partition::from_communities(kW, {{"a", "b", "c"}, {"d"}});
  const double expected = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25)) / std::log(2.0);
  CHECK(author_entropy({"a", "b", "c", "d"}, split31) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(author_entropy({"a", "b", "c", "d"}, split31) == doctest::Approx(0.8113).epsilon(1e-4));
  // Departed authors are ignored; nobody surviving gives 0.
  CHECK(author_entropy({"a", "c", "gone"}, next) == doctest::Approx(1.0));
  CHECK(author_entropy({"x", "y"}, next) == 0.0);
  CHECK(author_entropy({"a", "c", "e"}, next) == doctest::Approx(1.0));
}

TEST_CASE("relative density") {
  auto g = graph({{{"a", "b"}, 1}, {{"b", "c"}, 1}, {{"a", "c"}, 1}, {{"c", "d"}, 1}});
  CHECK(relative_density(g, {"a", "b", "c"}) == 0.75);
  CHECK(relative_density(g, {"a", "b", "c"}, DensityMode::degree) == doctest::Approx(6.0 / 7.0));
  CHECK(relative_density(g, {"a", "b", "c", "d"}) == 1.0);
  CHECK(relative_density(g, {"d"}) == 0.0);
  auto lone = graph({{{"a", "b"}, 1}}, {"z"});
  CHECK(relative_density(lone, {"z"}) == 1.0);
  CHECK_THROWS(relative_density(g, {}));
  CHECK_THROWS(relative_density(g, {"nobody"}));

  std::vector<double> scaled;
  for (const auto& e : g.edges()) scaled.push_back(e.weight * 9.25);
  CHECK(relative_density(g.reweighted(scaled), {"a", "b", "c"}) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("topic drift") {
  auto t = topic_drift(vec({1, 2}), vec({1, 2}));
  CHECK(t.value == doctest::Approx(1.0));
  CHECK_FALSE(t.degenerate);
  CHECK(topic_drift(vec({1, 0}), vec({0, 3})).value == 0.0);
  auto zero = topic_drift(vec({0, 0}), vec({1, 0}));
  CHECK(zero.value == 0.0);
  CHECK(zero.degenerate);
}

TEST_CASE("cluster content ratio") {
  auto same = vectors_of({{"a", vec({1, 1})}, {"b", vec({1, 1})}});
  CHECK(cluster_content_ratio({"a", "b"}, same, {"a", "b"}).value == doctest::Approx(1.0));

  auto four = vectors_of({{"a", vec({1, 0})}, {"b", vec({1, 0})}, {"c", vec({0, 1})}, {"d", vec({0, 1})}});
  auto h = cluster_content_ratio({"a", "b"}, four, {"a", "b", "c", "d"});
  CHECK(h.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK_FALSE(h.degenerate);

  // Scaling every vector by one constant leaves H unchanged.
  auto scaled = vectors_of({{"a", vec({3, 0})}, {"b", vec({3, 0})}, {"c", vec({0, 3})}, {"d", vec({0, 3})}});
  CHECK(cluster_content_ratio({"a", "b"}, scaled, {"a", "b", "c", "d"}).value ==
        doctest::Approx(h.value).epsilon(1e-12));

  auto blank = vectors_of({{"a", vec({0, 0})}, {"b", vec({1, 0})}});
  auto degenerate = cluster_content_ratio({"a"}, blank, {"a", "b"});
  CHECK(std::isinf(degenerate.value));
  CHECK(degenerate.degenerate);
}

TEST_CASE("profiles and assessments over a series") {
  auto g0 = graph({{{"a", "b"}, 2}, {{"b", "c"}, 1}, {{"c", "d"}, 2}}, {}, 2000);
  auto g1 = graph({{{"a", "b"}, 2}, {{"b", "c"}, 1}, {{"c", "d"}, 2}}, {}, 2001);
  auto p0 = Partition::from_communities(TemporalWindow(2000, 2000), {{"a", "b"}, {"c", "d"}});
  auto p1 = Partition::from_communities(TemporalWindow(2001, 2001), {{"a", "b"}, {"c", "d"}});
  auto v0 = vectors_of({{"a", vec({1, 0})}, {"b", vec({1, 0})}, {"c", vec({0, 1})}, {"d", vec({0, 1})}}, 2000);
  auto v1 = vectors_of({{"a", vec({1, 0})}, {"b", vec({1, 1})}, {"c", vec({0, 1})}, {"d", vec({0, 1})}}, 2001);
  auto series = make_series({g0, g1}, {p0, p1}, {v0, v1});

  auto profiles = lifecycle_profiles(series);
  REQUIRE(profiles.size() == 4);
  CHECK(profiles[0].size == 2);
  CHECK_FALSE(profiles[0].entropy.has_value());
  CHECK_FALSE(profiles[0].drift.has_value());
  // b lies on the a..c and a..d paths.
  CHECK(profiles[0].avg_betweenness == doctest::Approx(1.0));
  CHECK(profiles[0].density == doctest::Approx(2.0 / 3.0));
  REQUIRE(profiles[2].entropy.has_value());
  CHECK(*profiles[2].entropy == 0.0);
  REQUIRE(profiles[2].drift.has_value());
  CHECK(profiles[2].drift->value == doctest::Approx(centroid({"a", "b"}, v1).coeff(0) /
                                                    centroid({"a", "b"}, v1).norm()));
  CHECK_THROWS_AS(lifecycle_profile(series, {2, 0}), LookupError);
  CHECK_THROWS_AS(lifecycle_profile(series, {0, 7}), LookupError);

  auto rows = assess_series(series);
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].mean_a.has_value());
  CHECK(*rows[1].mean_a == 0.0);
  CHECK(rows[1].var_h >= 0.0);

  auto whole = Partition::from_communities(TemporalWindow(2000, 2000), {{"a", "b", "c", "d"}});
  CHECK(assess_clustering(g0, whole, v0).modularity == doctest::Approx(0.0));

  std::ostringstream prof;
  write_profiles(prof, profiles);
  std::istringstream lines(prof.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "window_idx\tcommunity_id\tS\tB\tA\trho\tT\tH");
  CHECK(first.rfind("0\t0\t2\t1.00000\tNA\t0.66667\tNA\t", 0) == 0);

  std::ostringstream assessment;
  write_assessment(assessment, rows);
  CHECK(assessment.str().rfind("window_idx\twindow\tcommunities\tQ\tvar_Q\tmean_H\tvar_H\tmean_A\tvar_A\n", 0) == 0);
}
