#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "commtrace/track.hpp"
#include "oracles.hpp"

using namespace commtrace;

namespace {

Partition part(int year, const std::vector<MemberSet>& communities) {
  return Partition::from_communities(TemporalWindow(year, year), communities);
}

Partition random_partition(std::mt19937_64& rng, int year, std::size_t n, int max_labels) {
  std::map<AuthorId, int> a;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng() % 5 == 0) continue;  // author absent from this window
    a[oracle::node_name(i)] = int(rng() % max_labels);
  }
  if (a.empty()) a[oracle::node_name(0)] = 0;
  return Partition(TemporalWindow(year, year), a);
}

}  // namespace

TEST_CASE("jaccard") {
  CHECK(jaccard({"x", "y", "z"}, {"x", "y", "z"}) == 1.0);
  CHECK(jaccard({"x", "y", "z"}, {"u", "v"}) == 0.0);
  CHECK(jaccard({"a", "b", "c"}, {"b", "c", "d"}) == 0.5);
  CHECK(jaccard({}, {}) == 0.0);
}

TEST_CASE("ancestor and descendant fractions") {
  CHECK(ancestor_fraction({"a", "b"}, {"a", "b"}) == 1.0);
  CHECK(ancestor_fraction({"a"}, {"b"}) == 0.0);
  CHECK(descendant_fraction({"a", "b", "c", "d"}, {"c", "d", "e"}) == 0.5);
  CHECK(ancestor_fraction({"a", "b", "c", "d"}, {"c", "d", "e"}) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(ancestor_fraction({"a"}, {}), UndefinedFraction);
  CHECK_THROWS_AS(descendant_fraction({}, {"a"}), UndefinedFraction);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    MemberSet a, b;
    for (int i = 0; i < 12; ++i) {
      if (rng() % 2) a.push_back(oracle::node_name(i));
      if (rng() % 2) b.push_back(oracle::node_name(i));
    }
    if (a.empty() || b.empty()) continue;
    const double shared = double(intersection_size(a, b));
    CHECK(ancestor_fraction(a, b) * double(b.size()) == doctest::Approx(shared).epsilon(1e-12));
    CHECK(descendant_fraction(a, b) * double(a.size()) == doctest::Approx(shared).epsilon(1e-12));
  }
}

TEST_CASE("matching examples") {
  auto p = part(2000, {{"a", "b"}, {"c"}, {"d", "e", "f"}});
  auto self = match_partitions(p, part(2001, {{"a", "b"}, {"c"}, {"d", "e", "f"}}));
  REQUIRE(self.size() == 3);
  for (const auto& m : self) {
    CHECK(m.from == m.to);
    CHECK(m.jaccard == 1.0);
  }

  // Exact tie: the lower source id wins, the other has no fallback.
  auto tie = match_partitions(part(2000, {{"a", "b"}, {"c", "d"}}), part(2001, {{"a", "b", "c", "d", "e", "f"}}));
  REQUIRE(tie.size() == 1);
  CHECK(tie[0] == Match{0, 0, 2.0 / 6.0});

  auto fallback = match_partitions(part(2000, {{"a", "b", "c"}, {"d"}}), part(2001, {{"a", "b"}, {"c", "d"}}));
  REQUIRE(fallback.size() == 2);
  CHECK(fallback[0].to == 0);
  CHECK(fallback[0].jaccard == doctest::Approx(2.0 / 3.0));
  CHECK(fallback[1] == Match{1, 1, 0.5});

  // Disjoint communities never match.
  CHECK(match_partitions(part(2000, {{"a"}}), part(2001, {{"b"}})).empty());
}

TEST_CASE("matching: loser falls back to its second choice") {
  // c0 and c1 both prefer t0; c0 wins, c1 takes t1.
  auto current = part(2000, {{"a", "b", "c"}, {"d", "e", "x"}});
  auto next = part(2001, {{"a", "b", "c", "d", "e"}, {"x", "y", "z", "w", "v"}});
  auto m = match_partitions(current, next);
  REQUIRE(m.size() == 2);
  CHECK(m[0].to == 0);
  CHECK(m[1].to == 1);
}

TEST_CASE("matching is a partial injection and agrees with propose/reject") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    auto a = random_partition(rng, 2000, 10, 4);
    auto b = random_partition(rng, 2001, 10, 4);
    auto m = match_partitions(a, b);
    std::set<int> targets;
    for (const auto& e : m) {
      CHECK(targets.insert(e.to).second);
      CHECK(e.jaccard > 0.0);
    }
    CHECK(m == oracle::propose_reject_matching(a, b));
  }
}

TEST_CASE("matching threshold") {
  auto a = part(2000, {{"a", "b", "c", "d"}});
  auto b = part(2001, {{"a", "x", "y", "z"}});
  CHECK(match_partitions(a, b).size() == 1);
  CHECK(match_partitions(a, b, 0.5).empty());
}

TEST_CASE("lineage construction") {
  SUBCASE("single partition") {
    auto l = build_lineage({part(2000, {{"a"}, {"b"}})});
    CHECK(l.window_count() == 1);
    CHECK(l.edges().empty());
  }
  SUBCASE("identical partitions") {
    auto p = std::vector<MemberSet>{{"a", "b"}, {"c"}};
    auto l = build_lineage({part(2000, p), part(2001, p)});
    for (const auto& e : l.edges()) {
      CHECK(e.from == e.to);
      CHECK(e.value == 1.0);
    }
    CHECK(l.matched({0, 0}, 0));
    CHECK(l.matched({0, 1}, 1));
    CHECK(l.match_into({1, 1})->from == 1);
  }
  SUBCASE("threshold 1 keeps only perfect annotations") {
    auto l = build_lineage({part(2000, {{"a", "b"}, {"c", "d"}}), part(2001, {{"a", "b"}, {"c"}, {"d", "e"}})},
                           {.min_annotated_fraction = 1.0});
    for (const auto& e : l.edges()) {
      if (e.relation != Relation::match) CHECK(e.value == 1.0);
    }
    auto has = [&](int from, int to, Relation r) {
      return std::any_of(l.edges().begin(), l.edges().end(),
                         [&](const LineageEdge& e) { return e.from == from && e.to == to && e.relation == r; });
    };
    CHECK(has(0, 0, Relation::ancestor));
    CHECK(has(1, 1, Relation::ancestor));
    CHECK_FALSE(has(1, 1, Relation::descendant));
    CHECK_FALSE(has(1, 2, Relation::ancestor));
  }
  SUBCASE("windows must be consecutive and ordered") {
    CHECK_THROWS_AS(build_lineage({part(2001, {{"a"}}), part(2000, {{"a"}})}), InvalidConfig);
    CHECK_THROWS_AS(build_lineage({part(2000, {{"a"}}), part(2001, {{"a"}}), part(2003, {{"a"}})}), InvalidConfig);
  }
  SUBCASE("lookups") {
    auto l = build_lineage({part(2000, {{"a"}}), part(2001, {{"a"}})});
    CHECK(l.exists({1, 0}));
    CHECK_FALSE(l.exists({1, 1}));
    CHECK_FALSE(l.exists({2, 0}));
    CHECK_THROWS_AS(l.match_from({0, 5}), LookupError);
    CHECK_FALSE(l.match_from({1, 0}).has_value());
  }
}

TEST_CASE("lineage invariants on random sequences") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Partition> seq;
    for (int y = 0; y < 4; ++y) seq.push_back(random_partition(rng, 2000 + y, 14, 5));
    auto l = build_lineage(seq);
    std::map<std::pair<std::size_t, int>, double> ancestor_sum;
    std::set<std::tuple<std::size_t, int>> into;
    for (const auto& e : l.edges()) {
      CHECK(e.value >= 0.0);
      CHECK(e.value <= 1.0);
      if (e.relation == Relation::ancestor) ancestor_sum[{e.window + 1, e.to}] += e.value;
      if (e.relation == Relation::match) CHECK(into.insert({e.window, e.to}).second);
    }
    for (const auto& [ref, sum] : ancestor_sum) {
      const auto& members = seq[ref.first].communities()[std::size_t(ref.second)];
      std::size_t carried = 0;
      for (const auto& a : members) carried += seq[ref.first - 1].community_of(a).has_value();
      CHECK(sum <= 1.0 + 1e-12);
      if (carried < members.size()) CHECK(sum < 1.0);
      else CHECK(sum == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("lineage.tsv") {
  auto l = build_lineage({part(2000, {{"a", "b", "c"}}), part(2001, {{"a", "b"}, {"c", "x"}})});
  std::ostringstream out;
  write_lineage(out, l);
  CHECK(out.str() ==
        "0\t0\tmatch\t0\t0.6667\n"
        "0\t0\tancestor\t0\t1.0000\n"
        "0\t0\tancestor\t1\t0.5000\n"
        "0\t0\tdescendant\t0\t0.6667\n"
        "0\t0\tdescendant\t1\t0.3333\n");
}
