#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

#include "commtrace/common.hpp"
#include "commtrace/detect.hpp"
#include "commtrace/netbuild.hpp"
#include "commtrace/stemmer.hpp"

namespace commtrace {

/// Sparse term-weight vector over a Vocabulary's index space.
using TermVector = Eigen::SparseVector<double>;

struct KeywordAssignment {
  DocId doc_id;
  std::vector<std::string> keywords;  // raw, before tokenizing and stemming
};

std::vector<KeywordAssignment> read_keywords(std::istream& in, const std::string& source = "keywords.tsv");

/// Stemmed terms, indexed in lexicographic order.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> terms);

  static Vocabulary from_assignments(const std::vector<KeywordAssignment>& assignments);

  std::size_t size() const { return terms_.size(); }
  const std::string& term(Eigen::Index index) const { return terms_[static_cast<std::size_t>(index)]; }
  std::optional<Eigen::Index> index_of(const std::string& term) const;

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, Eigen::Index> lookup_;
};

/// Per-window author vectors: pooled raw term counts (`tf`) and TF-IAF
/// weights. Every author with an in-window document has an entry, possibly
/// empty.
class AuthorVectors {
 public:
  AuthorVectors() = default;
  AuthorVectors(TemporalWindow window, std::size_t dimension);

  const TemporalWindow& window() const { return window_; }
  std::size_t dimension() const { return dimension_; }

  void insert(const AuthorId& author, TermVector tf, TermVector weights);
  bool has(const AuthorId& author) const { return weights_.contains(author); }
  const std::map<AuthorId, TermVector>& all_weights() const { return weights_; }

  /// Zero vector for authors without in-window documents.
  const TermVector& weights_of(const AuthorId& author) const;
  const TermVector& tf_of(const AuthorId& author) const;

 private:
  TemporalWindow window_;
  std::size_t dimension_ = 0;
  std::map<AuthorId, TermVector> tf_;
  std::map<AuthorId, TermVector> weights_;
  TermVector zero_;
};

/// weight(t, a) = tf(t, a) * ln(|A_w| / af(t)), with A_w the authors having an
/// in-window document and af(t) the number of them whose pool contains t.
AuthorVectors build_author_vectors(const std::vector<KeywordAssignment>& assignments, const Corpus& corpus,
                                   const TemporalWindow& window, const Vocabulary& vocabulary);

/// TF-IAF over already pooled per-author term counts. Every key of `pools`
/// counts toward |A_w|, including authors with an empty pool.
AuthorVectors tf_iaf(const TemporalWindow& window, const std::map<AuthorId, std::map<std::string, double>>& pools,
                     const Vocabulary& vocabulary);

/// Term-wise mean over `members`; members without keywords count in the
/// denominator.
TermVector centroid(const MemberSet& members, const AuthorVectors& vectors);

struct Centroid {
  CommunityRef community;
  TermVector weights;
};

/// 0 when either vector is zero.
double cosine_similarity(const TermVector& u, const TermVector& v);
double dissim(const TermVector& u, const TermVector& v);

/// Union of the top-k terms by centroid TF-IAF weight and the top-k terms by
/// raw community term frequency; ties break lexicographically. Sorted.
std::vector<std::string> characterising_keywords(const MemberSet& members, const AuthorVectors& vectors,
                                                 const Vocabulary& vocabulary, std::size_t k = 20);

/// `window_idx<TAB>community_id<TAB>term:weight,...` by descending weight.
void write_centroid_row(std::ostream& out, const Centroid& centroid, const Vocabulary& vocabulary);

}  // namespace commtrace
