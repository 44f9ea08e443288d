#include "commtrace/netbuild.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "tsv.hpp"

namespace commtrace {

Corpus::Corpus(const std::vector<CitationRecord>& citations, std::vector<DocumentMeta> docs) {
  for (auto& doc : docs) {
    auto id = doc.doc_id;
    docs_.insert_or_assign(std::move(id), std::move(doc));
  }
  std::map<DocId, std::set<DocId>> grouped;
  for (const auto& record : citations) {
    ++records_;
    if (record.citing_doc == record.cited_doc) {
      ++self_citations_;
      continue;
    }
    if (!grouped[record.citing_doc].insert(record.cited_doc).second) ++duplicates_;
  }
  for (auto& [citing, cited] : grouped) {
    citations_.emplace(citing, std::vector<DocId>(cited.begin(), cited.end()));
  }
}

const DocumentMeta* Corpus::find_doc(const DocId& id) const {
  auto it = docs_.find(id);
  return it == docs_.end() ? nullptr : &it->second;
}

std::optional<std::pair<int, int>> Corpus::year_range() const {
  if (docs_.empty()) return std::nullopt;
  int lo = docs_.begin()->second.year;
  int hi = lo;
  for (const auto& [id, doc] : docs_) {
    lo = std::min(lo, doc.year);
    hi = std::max(hi, doc.year);
  }
  return std::make_pair(lo, hi);
}

std::vector<CitationRecord> read_citations(std::istream& in, const std::string& source) {
  std::vector<CitationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (tsv::next_record(in, line, line_no)) {
    auto fields = tsv::split(line, '\t');
    if (fields.size() != 2) {
      throw FormatError(source, line_no, fmt::format("expected 2 columns, found {}", fields.size()));
    }
    auto citing = std::string(tsv::trim(fields[0]));
    auto cited = std::string(tsv::trim(fields[1]));
    if (citing.empty() || cited.empty()) throw FormatError(source, line_no, "empty document id");
    out.push_back({std::move(citing), std::move(cited)});
  }
  return out;
}

std::vector<DocumentMeta> read_docs(std::istream& in, const std::string& source) {
  std::vector<DocumentMeta> out;
  std::set<DocId> seen;
  std::string line;
  std::size_t line_no = 0;
  while (tsv::next_record(in, line, line_no)) {
    auto fields = tsv::split(line, '\t');
    if (fields.size() != 3) {
      throw FormatError(source, line_no, fmt::format("expected 3 columns, found {}", fields.size()));
    }
    DocumentMeta doc;
    doc.doc_id = std::string(tsv::trim(fields[0]));
    if (doc.doc_id.empty()) throw FormatError(source, line_no, "empty document id");
    auto year = tsv::parse_int<int>(fields[1]);
    if (!year) throw FormatError(source, line_no, "bad year '" + fields[1] + "'");
    doc.year = *year;
    std::vector<AuthorId> authors;
    for (const auto& a : tsv::split(fields[2], ';')) {
      auto trimmed = tsv::trim(a);
      if (!trimmed.empty()) authors.emplace_back(trimmed);
    }
    if (authors.empty()) throw FormatError(source, line_no, "document '" + doc.doc_id + "' has no authors");
    doc.authors = make_member_set(std::move(authors));
    if (!seen.insert(doc.doc_id).second) {
      throw FormatError(source, line_no, "duplicate document id '" + doc.doc_id + "'");
    }
    out.push_back(std::move(doc));
  }
  return out;
}

Corpus load_corpus(const std::filesystem::path& citations, const std::filesystem::path& docs) {
  std::ifstream cin(citations);
  if (!cin) throw InvalidConfig("cannot open " + citations.string());
  std::ifstream din(docs);
  if (!din) throw InvalidConfig("cannot open " + docs.string());
  return Corpus(read_citations(cin, citations.string()), read_docs(din, docs.string()));
}

std::vector<TemporalWindow> build_windows(int first_year, int last_year, int length, int stride) {
  if (length < 1) throw InvalidConfig(fmt::format("window length must be >= 1, got {}", length));
  if (stride < 1) throw InvalidConfig(fmt::format("window stride must be >= 1, got {}", stride));
  if (first_year > last_year) {
    throw InvalidConfig(fmt::format("first year {} after last year {}", first_year, last_year));
  }
  std::vector<TemporalWindow> out;
  for (int start = first_year; start <= last_year; start += stride) {
    out.emplace_back(start, std::min(start + length - 1, last_year));
  }
  return out;
}

// ---------------------------------------------------------------------------

SnapshotGraph::SnapshotGraph(TemporalWindow window, const EdgeMap& edges,
                             const std::vector<AuthorId>& extra_nodes)
    : window_(window) {
  std::map<std::pair<AuthorId, AuthorId>, double> canonical;
  std::set<AuthorId> names(extra_nodes.begin(), extra_nodes.end());
  for (const auto& [pair, w] : edges) {
    const auto& [a, b] = pair;
    if (a == b) throw std::invalid_argument("self-loop on '" + a + "'");
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument(fmt::format("edge {}-{} has non-positive weight {}", a, b, w));
    }
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    canonical[key] += w;
    names.insert(a);
    names.insert(b);
  }
  nodes_.assign(names.begin(), names.end());
  for (std::size_t i = 0; i < nodes_.size(); ++i) lookup_.emplace(nodes_[i], i);
  edges_.reserve(canonical.size());
  for (const auto& [pair, w] : canonical) {
    edges_.push_back({lookup_.at(pair.first), lookup_.at(pair.second), w});
  }
  index();
}

void SnapshotGraph::index() {
  adjacency_.assign(nodes_.size(), {});
  strength_.assign(nodes_.size(), 0.0);
  total_weight_ = 0.0;
  for (const auto& e : edges_) {
    adjacency_[e.u].push_back({e.v, e.weight});
    adjacency_[e.v].push_back({e.u, e.weight});
    strength_[e.u] += e.weight;
    strength_[e.v] += e.weight;
    total_weight_ += e.weight;
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end(), [](const Neighbor& x, const Neighbor& y) { return x.node < y.node; });
  }
}

std::optional<std::size_t> SnapshotGraph::index_of(const AuthorId& author) const {
  auto it = lookup_.find(author);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

double SnapshotGraph::weight(const AuthorId& a, const AuthorId& b) const {
  auto ia = index_of(a);
  auto ib = index_of(b);
  if (!ia || !ib) return 0.0;
  const auto& list = adjacency_[*ia];
  auto it = std::lower_bound(list.begin(), list.end(), *ib,
                             [](const Neighbor& n, std::size_t target) { return n.node < target; });
  return (it != list.end() && it->node == *ib) ? it->weight : 0.0;
}

SnapshotGraph SnapshotGraph::reweighted(const std::vector<double>& weights) const {
  if (weights.size() != edges_.size()) throw std::invalid_argument("weight vector size mismatch");
  SnapshotGraph out;
  out.window_ = window_;
  out.nodes_ = nodes_;
  out.lookup_ = lookup_;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (weights[i] < 0.0 || !std::isfinite(weights[i])) {
      throw std::invalid_argument("negative or non-finite edge weight");
    }
    if (weights[i] > 0.0) out.edges_.push_back({edges_[i].u, edges_[i].v, weights[i]});
  }
  out.index();
  return out;
}

// ---------------------------------------------------------------------------

SnapshotGraph build_cocitation(const Corpus& corpus, const TemporalWindow& window, BuildReport* report) {
  SnapshotGraph::EdgeMap weights;
  std::size_t missing = 0;
  std::size_t events = 0;
  std::vector<const DocumentMeta*> cited;
  for (const auto& [citing, targets] : corpus.citations()) {
    cited.clear();
    for (const auto& id : targets) {
      const auto* doc = corpus.find_doc(id);
      if (doc == nullptr) {
        ++missing;
        continue;
      }
      if (window.contains(doc->year)) cited.push_back(doc);
    }
    for (std::size_t i = 0; i < cited.size(); ++i) {
      for (std::size_t j = i + 1; j < cited.size(); ++j) {
        for (const auto& a1 : cited[i]->authors) {
          for (const auto& a2 : cited[j]->authors) {
            if (a1 == a2) continue;
            weights[a1 < a2 ? std::make_pair(a1, a2) : std::make_pair(a2, a1)] += 1.0;
            ++events;
          }
        }
      }
    }
  }
  if (report != nullptr) {
    report->missing_metadata += missing;
    report->cocitation_events += events;
  }
  return SnapshotGraph(window, weights);
}

std::map<AuthorId, long> author_citation_counts(const Corpus& corpus, const TemporalWindow& window) {
  std::map<AuthorId, long> counts;
  std::set<AuthorId> touched;
  for (const auto& [citing, targets] : corpus.citations()) {
    touched.clear();
    for (const auto& id : targets) {
      const auto* doc = corpus.find_doc(id);
      if (doc == nullptr || !window.contains(doc->year)) continue;
      touched.insert(doc->authors.begin(), doc->authors.end());
    }
    for (const auto& a : touched) ++counts[a];
  }
  return counts;
}

std::size_t reconcile_citation_counts(const SnapshotGraph& graph, std::map<AuthorId, long>& counts) {
  std::size_t raised = 0;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    double strongest = 0.0;
    for (const auto& n : graph.neighbors(i)) strongest = std::max(strongest, n.weight);
    auto& count = counts[graph.node(i)];
    auto needed = static_cast<long>(std::ceil(strongest));
    if (count < needed) {
      count = needed;
      ++raised;
    }
  }
  return raised;
}

SnapshotGraph cocit_normalize(const SnapshotGraph& graph, const std::map<AuthorId, long>& citation_counts) {
  auto count_of = [&](std::size_t node) -> double {
    auto it = citation_counts.find(graph.node(node));
    if (it == citation_counts.end()) {
      throw LookupError("no citation count for author '" + graph.node(node) + "'");
    }
    if (it->second <= 0) {
      throw std::invalid_argument("citation count for '" + graph.node(node) + "' must be positive");
    }
    return static_cast<double>(it->second);
  };
  std::vector<double> weights;
  weights.reserve(graph.edges().size());
  for (const auto& e : graph.edges()) {
    double ca = count_of(e.u);
    double cb = count_of(e.v);
    if (e.weight > std::min(ca, cb)) {
      throw std::invalid_argument(fmt::format("co-citation {} of {}-{} exceeds citation count", e.weight,
                                              graph.node(e.u), graph.node(e.v)));
    }
    weights.push_back(e.weight * e.weight / (std::min(ca, cb) * 0.5 * (ca + cb)));
  }
  return graph.reweighted(weights);
}

void write_edges(std::ostream& out, const SnapshotGraph& graph) {
  // Node indices follow lexicographic author order, so (u, v) order is the
  // required row order.
  for (const auto& e : graph.edges()) {
    out << graph.node(e.u) << '\t' << graph.node(e.v) << '\t' << format_trimmed(e.weight, 6) << '\n';
  }
}

SnapshotGraph read_edges(std::istream& in, const TemporalWindow& window, const std::string& source) {
  SnapshotGraph::EdgeMap edges;
  std::string line;
  std::size_t line_no = 0;
  while (tsv::next_record(in, line, line_no)) {
    auto fields = tsv::split(line, '\t');
    if (fields.size() != 3) {
      throw FormatError(source, line_no, fmt::format("expected 3 columns, found {}", fields.size()));
    }
    auto w = tsv::parse_double(fields[2]);
    if (!w || !(*w > 0.0)) throw FormatError(source, line_no, "bad weight '" + fields[2] + "'");
    if (fields[0] == fields[1]) throw FormatError(source, line_no, "self-loop");
    auto key = fields[0] < fields[1] ? std::make_pair(fields[0], fields[1]) : std::make_pair(fields[1], fields[0]);
    if (edges.contains(key)) throw FormatError(source, line_no, "duplicate edge");
    edges.emplace(std::move(key), *w);
  }
  return SnapshotGraph(window, edges);
}

}  // namespace commtrace
