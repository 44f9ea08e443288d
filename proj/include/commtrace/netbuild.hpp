#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "commtrace/common.hpp"

namespace commtrace {

struct CitationRecord {
  DocId citing_doc;
  DocId cited_doc;
};

struct DocumentMeta {
  DocId doc_id;
  int year = 0;
  MemberSet authors;  // set semantics; repeated author ids collapse
};

/// Deduplicated citation relation plus document metadata.
class Corpus {
 public:
  Corpus() = default;
  Corpus(const std::vector<CitationRecord>& citations, std::vector<DocumentMeta> docs);

  /// citing doc -> sorted unique cited docs
  const std::map<DocId, std::vector<DocId>>& citations() const { return citations_; }
  const std::map<DocId, DocumentMeta>& docs() const { return docs_; }
  const DocumentMeta* find_doc(const DocId& id) const;

  std::size_t duplicate_records() const { return duplicates_; }
  std::size_t self_citations() const { return self_citations_; }
  std::size_t record_count() const { return records_; }

  /// Inclusive year range covered by the document metadata.
  std::optional<std::pair<int, int>> year_range() const;

 private:
  std::map<DocId, std::vector<DocId>> citations_;
  std::map<DocId, DocumentMeta> docs_;
  std::size_t duplicates_ = 0;
  std::size_t self_citations_ = 0;
  std::size_t records_ = 0;
};

std::vector<CitationRecord> read_citations(std::istream& in, const std::string& source = "citations.tsv");
std::vector<DocumentMeta> read_docs(std::istream& in, const std::string& source = "docs.tsv");
Corpus load_corpus(const std::filesystem::path& citations, const std::filesystem::path& docs);

std::vector<TemporalWindow> build_windows(int first_year, int last_year, int length, int stride);

struct Neighbor {
  std::size_t node;
  double weight;
};

struct Edge {
  std::size_t u;  // u < v
  std::size_t v;
  double weight;
};

/// Weighted undirected author graph for one window. Immutable once built.
class SnapshotGraph {
 public:
  using EdgeMap = std::map<std::pair<AuthorId, AuthorId>, double>;

  SnapshotGraph() = default;
  /// Pairs may be given in either order; entries for the same unordered pair
  /// are summed. Self-loops and non-positive weights are rejected.
  /// `extra_nodes` adds isolated vertices.
  SnapshotGraph(TemporalWindow window, const EdgeMap& edges,
                const std::vector<AuthorId>& extra_nodes = {});

  const TemporalWindow& window() const { return window_; }
  const std::vector<AuthorId>& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::optional<std::size_t> index_of(const AuthorId& author) const;
  const AuthorId& node(std::size_t index) const { return nodes_[index]; }

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Neighbor>& neighbors(std::size_t node) const { return adjacency_[node]; }

  /// 0 when the pair is not connected.
  double weight(const AuthorId& a, const AuthorId& b) const;
  double strength(std::size_t node) const { return strength_[node]; }
  /// Sum of edge weights (each edge once).
  double total_weight() const { return total_weight_; }

  /// Same topology, weights replaced edge-by-edge (index-aligned with edges()).
  /// Edges whose new weight is 0 are dropped.
  SnapshotGraph reweighted(const std::vector<double>& weights) const;

 private:
  void index();

  TemporalWindow window_;
  std::vector<AuthorId> nodes_;
  std::unordered_map<AuthorId, std::size_t> lookup_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<double> strength_;
  double total_weight_ = 0.0;
};

struct BuildReport {
  std::size_t missing_metadata = 0;  // records whose cited doc has no metadata
  std::size_t cocitation_events = 0;
};

/// Author co-citation graph for `window`: two in-window documents cited by a
/// common third document link every cross-document author pair.
SnapshotGraph build_cocitation(const Corpus& corpus, const TemporalWindow& window,
                               BuildReport* report = nullptr);

/// Number of citing documents that cite at least one of each author's
/// in-window documents.
std::map<AuthorId, long> author_citation_counts(const Corpus& corpus, const TemporalWindow& window);

/// Raises counts below an author's strongest raw co-citation up to that value
/// so that normalization stays within [0, 1]. Returns how many were raised.
std::size_t reconcile_citation_counts(const SnapshotGraph& graph, std::map<AuthorId, long>& counts);

/// cocit(a,b)^2 / (min(cit_a, cit_b) * mean(cit_a, cit_b)).
SnapshotGraph cocit_normalize(const SnapshotGraph& graph, const std::map<AuthorId, long>& citation_counts);

void write_edges(std::ostream& out, const SnapshotGraph& graph);
SnapshotGraph read_edges(std::istream& in, const TemporalWindow& window,
                         const std::string& source = "edges.tsv");

}  // namespace commtrace
