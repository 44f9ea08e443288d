#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "commtrace/netbuild.hpp"

using namespace commtrace;

namespace {

std::vector<int> start_years(const std::vector<TemporalWindow>& ws) {
  std::vector<int> out;
  for (const auto& w : ws) out.push_back(w.start_year);
  return out;
}

std::vector<double> strength_multiset(const SnapshotGraph& g) {
  std::vector<double> out;
  for (std::size_t i = 0; i < g.node_count(); ++i) out.push_back(g.strength(i));
  std::sort(out.begin(), out.end());
  return out;
}

const TemporalWindow k2000s(2000, 2002);

}  // namespace

TEST_CASE("build_windows: sliding three-year windows clip at the end") {
  auto ws = build_windows(2000, 2009, 3, 1);
  REQUIRE(ws.size() == 10);
  CHECK(ws.front() == TemporalWindow(2000, 2002));
  CHECK(ws[7] == TemporalWindow(2007, 2009));
  CHECK(ws[8] == TemporalWindow(2008, 2009));
  CHECK(ws[9] == TemporalWindow(2009, 2009));
  CHECK(ws[8].label() == "2008–2009");
  CHECK(ws[9].label() == "2009");
  CHECK(std::is_sorted(ws.begin(), ws.end()));
}

TEST_CASE("build_windows: degenerate and strided cases") {
  auto single = build_windows(2005, 2005, 3, 1);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == TemporalWindow(2005, 2005));

  auto strided = build_windows(2000, 2003, 2, 2);
  REQUIRE(strided.size() == 2);
  CHECK(strided[0] == TemporalWindow(2000, 2001));
  CHECK(strided[1] == TemporalWindow(2002, 2003));
  CHECK(start_years(build_windows(2000, 2006, 3, 3)) == std::vector<int>{2000, 2003, 2006});
}

TEST_CASE("build_windows: invalid parameters") {
  CHECK_THROWS_AS(build_windows(2000, 2009, 0, 1), InvalidConfig);
  CHECK_THROWS_AS(build_windows(2000, 2009, 3, 0), InvalidConfig);
  CHECK_THROWS_AS(build_windows(2001, 2000, 3, 1), InvalidConfig);
}

TEST_CASE("co-citation: co-authors of one cited document are not linked") {
  Corpus corpus({{"D3", "D1"}, {"D3", "D2"}}, {{"D1", 2000, {"a1", "a2"}}, {"D2", 2001, {"a3"}}, {"D3", 2010, {"z"}}});
  auto g = build_cocitation(corpus, k2000s);
  CHECK(g.nodes() == std::vector<AuthorId>{"a1", "a2", "a3"});
  CHECK(g.edges().size() == 2);
  CHECK(g.weight("a1", "a3") == 1.0);
  CHECK(g.weight("a3", "a2") == 1.0);
  CHECK(g.weight("a1", "a2") == 0.0);
}

TEST_CASE("co-citation: weights count citing documents") {
  Corpus corpus({{"D3", "D1"}, {"D3", "D2"}, {"D4", "D1"}, {"D4", "D2"}},
                {{"D1", 2000, {"a1"}}, {"D2", 2000, {"a2"}}});
  auto g = build_cocitation(corpus, k2000s);
  CHECK(g.weight("a1", "a2") == 2.0);
  CHECK(g.total_weight() == 2.0);
}

TEST_CASE("co-citation: documents outside the window do not contribute") {
  Corpus corpus({{"D3", "D1"}, {"D3", "D2"}}, {{"D1", 1999, {"a1"}}, {"D2", 2000, {"a2"}}});
  auto g = build_cocitation(corpus, k2000s);
  CHECK(g.node_count() == 0);
  CHECK(g.edges().empty());
}

TEST_CASE("co-citation: missing metadata is skipped and counted") {
  Corpus corpus({{"D3", "D1"}, {"D3", "D2"}, {"D3", "ghost"}}, {{"D1", 2000, {"a1"}}, {"D2", 2000, {"a2"}}});
  BuildReport report;
  auto g = build_cocitation(corpus, k2000s, &report);
  CHECK(report.missing_metadata == 1);
  CHECK(report.cocitation_events == 1);
  CHECK(g.weight("a1", "a2") == 1.0);
}

TEST_CASE("co-citation: an author on both documents gets no self-loop") {
  Corpus corpus({{"D3", "D1"}, {"D3", "D2"}}, {{"D1", 2000, {"a", "b"}}, {"D2", 2000, {"a", "c"}}});
  auto g = build_cocitation(corpus, k2000s);
  CHECK(g.weight("a", "c") == 1.0);
  CHECK(g.weight("b", "a") == 1.0);
  CHECK(g.weight("b", "c") == 1.0);
  CHECK(g.edges().size() == 3);
}

TEST_CASE("corpus deduplicates records and drops self-citations") {
  Corpus corpus({{"D3", "D1"}, {"D3", "D1"}, {"D3", "D3"}, {"D3", "D2"}}, {{"D1", 2000, {"a"}}, {"D2", 2000, {"b"}}});
  CHECK(corpus.record_count() == 4);
  CHECK(corpus.duplicate_records() == 1);
  CHECK(corpus.self_citations() == 1);
  CHECK(build_cocitation(corpus, k2000s).weight("a", "b") == 1.0);
}

TEST_CASE("co-citation properties on random corpora") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n_docs = 3 + int(rng() % 18);
    std::vector<DocumentMeta> docs;
    for (int d = 0; d < n_docs; ++d) {
      MemberSet authors;
      const int k = 1 + int(rng() % 3);
      for (int i = 0; i < k; ++i) authors.push_back(fmt::format("a{}", rng() % 8));
      docs.push_back({fmt::format("d{}", d), 1999 + int(rng() % 5), make_member_set(authors)});
    }
    std::vector<CitationRecord> records;
    for (int c = 0; c < n_docs; ++c) {
      for (int d = 0; d < n_docs; ++d) {
        if (c != d && rng() % 3 == 0) records.push_back({fmt::format("d{}", c), fmt::format("d{}", d)});
      }
    }
    Corpus corpus(records, docs);
    BuildReport report;
    auto g = build_cocitation(corpus, k2000s, &report);

    // Independent count of (citing doc, cited pair, author pair) events.
    std::map<std::string, const DocumentMeta*> by_id;
    for (const auto& d : docs) by_id[d.doc_id] = &d;
    std::map<std::string, std::set<std::string>> cites;
    for (const auto& r : records) cites[r.citing_doc].insert(r.cited_doc);
    double events = 0;
    for (const auto& [citing, cited] : cites) {
      std::vector<std::string> v(cited.begin(), cited.end());
      for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = i + 1; j < v.size(); ++j) {
          const auto* x = by_id.at(v[i]);
          const auto* y = by_id.at(v[j]);
          if (!k2000s.contains(x->year) || !k2000s.contains(y->year)) continue;
          for (const auto& a : x->authors) {
            for (const auto& b : y->authors) events += a != b ? 1 : 0;
          }
        }
      }
    }
    CHECK(g.total_weight() == doctest::Approx(events));
    CHECK(double(report.cocitation_events) == events);

    // Record order does not matter.
    auto shuffled = records;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto g2 = build_cocitation(Corpus(shuffled, docs), k2000s);
    CHECK(g2.nodes() == g.nodes());
    REQUIRE(g2.edges().size() == g.edges().size());
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
      CHECK(g2.edges()[e].u == g.edges()[e].u);
      CHECK(g2.edges()[e].v == g.edges()[e].v);
      CHECK(g2.edges()[e].weight == g.edges()[e].weight);
    }

    // Relabelling authors gives the same weighted degree multiset.
    auto renamed = docs;
    for (auto& d : renamed) {
      MemberSet authors;
      for (const auto& a : d.authors) authors.push_back("x" + std::string(a.rbegin(), a.rend()));
      d.authors = make_member_set(authors);
    }
    CHECK(strength_multiset(build_cocitation(Corpus(records, renamed), k2000s)) == strength_multiset(g));

    // Normalised weights lie in [0, 1].
    auto counts = author_citation_counts(corpus, k2000s);
    reconcile_citation_counts(g, counts);
    auto n = cocit_normalize(g, counts);
    for (const auto& e : n.edges()) {
      CHECK(e.weight > 0.0);
      CHECK(e.weight <= 1.0 + 1e-15);
    }
  }
}

TEST_CASE("CoCit normalisation") {
  SnapshotGraph g(k2000s, {{{"a", "b"}, 2.0}, {{"c", "d"}, 1.0}});
  auto n = cocit_normalize(g, {{"a", 2}, {"b", 2}, {"c", 2}, {"d", 4}});
  CHECK(n.weight("a", "b") == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n.weight("c", "d") == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(n.weight("a", "c") == 0.0);
  CHECK(n.edges().size() == 2);
  CHECK_THROWS_AS(cocit_normalize(g, {{"a", 2}, {"b", 2}, {"c", 2}}), LookupError);
  CHECK_THROWS_AS(cocit_normalize(g, {{"a", 1}, {"b", 2}, {"c", 2}, {"d", 4}}), std::invalid_argument);
}

TEST_CASE("CoCit equals one exactly when co-citation equals both counts") {
  for (long ca = 1; ca <= 4; ++ca) {
    for (long cb = 1; cb <= 4; ++cb) {
      for (long co = 1; co <= std::min(ca, cb); ++co) {
        SnapshotGraph g(k2000s, {{{"a", "b"}, double(co)}});
        const double w = cocit_normalize(g, {{"a", ca}, {"b", cb}}).weight("a", "b");
        CHECK(w <= 1.0);
        CHECK((w == 1.0) == (co == ca && co == cb));
      }
    }
  }
}

TEST_CASE("citation counts follow citing documents") {
  // c1 cites two of a's documents: it counts once.
  Corpus corpus({{"c1", "d1"}, {"c1", "d2"}, {"c1", "d3"}, {"c2", "d3"}},
                {{"d1", 2000, {"a"}}, {"d2", 2001, {"a"}}, {"d3", 2001, {"b"}}});
  auto counts = author_citation_counts(corpus, k2000s);
  CHECK(counts.at("a") == 1);
  CHECK(counts.at("b") == 2);
  auto g = build_cocitation(corpus, k2000s);
  CHECK(g.weight("a", "b") == 2.0);
  // a's count (1) is below its co-citation with b (2): raised before normalising.
  CHECK(reconcile_citation_counts(g, counts) == 1);
  CHECK(counts.at("a") == 2);
  CHECK(cocit_normalize(g, counts).weight("a", "b") == doctest::Approx(1.0));
}

TEST_CASE("snapshot graph invariants") {
  CHECK_THROWS(SnapshotGraph(k2000s, {{{"a", "a"}, 1.0}}));
  CHECK_THROWS(SnapshotGraph(k2000s, {{{"a", "b"}, 0.0}}));
  CHECK_THROWS(SnapshotGraph(k2000s, {{{"a", "b"}, -1.0}}));
  SnapshotGraph g(k2000s, {{{"b", "a"}, 1.5}}, {"z"});
  CHECK(g.weight("a", "b") == 1.5);
  CHECK(g.weight("b", "a") == 1.5);
  CHECK(g.nodes() == std::vector<AuthorId>{"a", "b", "z"});
  CHECK(g.strength(*g.index_of("z")) == 0.0);
  CHECK(g.total_weight() == 1.5);
}

TEST_CASE("edges.tsv round trip and format") {
  SnapshotGraph g(k2000s, {{{"b", "a"}, 1.0 / 6.0}, {{"a", "c"}, 2.0}, {{"b", "c"}, 0.25}});
  std::ostringstream out;
  write_edges(out, g);
  CHECK(out.str() == "a\tb\t0.166667\na\tc\t2\nb\tc\t0.25\n");
  std::istringstream in(out.str());
  auto back = read_edges(in, k2000s);
  std::ostringstream again;
  write_edges(again, back);
  CHECK(again.str() == out.str());
}

TEST_CASE("readers report line numbers") {
  std::istringstream citations("# header\nc1\td1\n\nc2\td1\textra\n");
  try {
    read_citations(citations, "citations.tsv");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(e.line == 4);
    CHECK(e.source == "citations.tsv");
  }
  std::istringstream docs("d1\t2000\ta;b\r\nd1\t2001\tc\n");
  CHECK_THROWS_AS(read_docs(docs), FormatError);
  std::istringstream bad_year("d1\tyear\ta\n");
  CHECK_THROWS_AS(read_docs(bad_year), FormatError);
  std::istringstream no_authors("d1\t2000\t ; \n");
  CHECK_THROWS_AS(read_docs(no_authors), FormatError);
  std::istringstream ok("d1\t2000\tb;a;b\r\n");
  auto parsed = read_docs(ok);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].authors == MemberSet{"a", "b"});
  std::istringstream edges("a\tb\tx\n");
  CHECK_THROWS_AS(read_edges(edges, k2000s), FormatError);
}
