#include "commtrace/topics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "tsv.hpp"

namespace commtrace {

std::vector<KeywordAssignment> read_keywords(std::istream& in, const std::string& source) {
  std::vector<KeywordAssignment> out;
  std::string line;
  std::size_t line_no = 0;
  while (tsv::next_record(in, line, line_no)) {
    auto fields = tsv::split(line, '\t');
    if (fields.size() != 2) {
      throw FormatError(source, line_no, fmt::format("expected 2 columns, found {}", fields.size()));
    }
    KeywordAssignment a;
    a.doc_id = std::string(tsv::trim(fields[0]));
    if (a.doc_id.empty()) throw FormatError(source, line_no, "empty document id");
    for (const auto& kw : tsv::split(fields[1], ';')) {
      auto trimmed = tsv::trim(kw);
      if (!trimmed.empty()) a.keywords.emplace_back(trimmed);
    }
    out.push_back(std::move(a));
  }
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  std::sort(terms_.begin(), terms_.end());
  terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
  for (std::size_t i = 0; i < terms_.size(); ++i) lookup_.emplace(terms_[i], static_cast<Eigen::Index>(i));
}

Vocabulary Vocabulary::from_assignments(const std::vector<KeywordAssignment>& assignments) {
  std::set<std::string> terms;
  for (const auto& a : assignments) {
    for (const auto& kw : a.keywords) {
      for (auto& t : stemmed_terms(kw)) terms.insert(std::move(t));
    }
  }
  return Vocabulary(std::vector<std::string>(terms.begin(), terms.end()));
}

std::optional<Eigen::Index> Vocabulary::index_of(const std::string& term) const {
  auto it = lookup_.find(term);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

AuthorVectors::AuthorVectors(TemporalWindow window, std::size_t dimension)
    : window_(window), dimension_(dimension), zero_(static_cast<Eigen::Index>(dimension)) {}

void AuthorVectors::insert(const AuthorId& author, TermVector tf, TermVector weights) {
  if (tf.size() != static_cast<Eigen::Index>(dimension_) || weights.size() != static_cast<Eigen::Index>(dimension_)) {
    throw std::invalid_argument("term vector dimension mismatch for '" + author + "'");
  }
  tf_.insert_or_assign(author, std::move(tf));
  weights_.insert_or_assign(author, std::move(weights));
}

const TermVector& AuthorVectors::weights_of(const AuthorId& author) const {
  auto it = weights_.find(author);
  return it == weights_.end() ? zero_ : it->second;
}

const TermVector& AuthorVectors::tf_of(const AuthorId& author) const {
  auto it = tf_.find(author);
  return it == tf_.end() ? zero_ : it->second;
}

AuthorVectors tf_iaf(const TemporalWindow& window, const std::map<AuthorId, std::map<std::string, double>>& pools,
                     const Vocabulary& vocabulary) {
  const auto dim = static_cast<Eigen::Index>(vocabulary.size());
  std::map<std::string, std::size_t> author_frequency;
  for (const auto& [author, pool] : pools) {
    for (const auto& [term, count] : pool) {
      if (count > 0.0) ++author_frequency[term];
    }
  }
  const double universe = static_cast<double>(pools.size());
  AuthorVectors out(window, vocabulary.size());
  for (const auto& [author, pool] : pools) {
    TermVector tf(dim);
    TermVector weights(dim);
    for (const auto& [term, count] : pool) {
      if (count <= 0.0) continue;
      auto index = vocabulary.index_of(term);
      if (!index) throw LookupError("term '" + term + "' not in vocabulary");
      tf.insert(*index) = count;
      double w = count * std::log(universe / static_cast<double>(author_frequency.at(term)));
      if (w > 0.0) weights.insert(*index) = w;
    }
    out.insert(author, std::move(tf), std::move(weights));
  }
  return out;
}

AuthorVectors build_author_vectors(const std::vector<KeywordAssignment>& assignments, const Corpus& corpus,
                                   const TemporalWindow& window, const Vocabulary& vocabulary) {
  std::map<AuthorId, std::map<std::string, double>> pools;
  for (const auto& [id, doc] : corpus.docs()) {
    if (!window.contains(doc.year)) continue;
    for (const auto& a : doc.authors) pools[a];
  }
  for (const auto& assignment : assignments) {
    const auto* doc = corpus.find_doc(assignment.doc_id);
    if (doc == nullptr || !window.contains(doc->year)) continue;
    for (const auto& kw : assignment.keywords) {
      for (const auto& term : stemmed_terms(kw)) {
        for (const auto& a : doc->authors) pools[a][term] += 1.0;
      }
    }
  }
  return tf_iaf(window, pools, vocabulary);
}

TermVector centroid(const MemberSet& members, const AuthorVectors& vectors) {
  if (members.empty()) throw std::invalid_argument("centroid of an empty member set");
  TermVector sum(static_cast<Eigen::Index>(vectors.dimension()));
  for (const auto& a : members) sum += vectors.weights_of(a);
  sum /= static_cast<double>(members.size());
  return sum;
}

double cosine_similarity(const TermVector& u, const TermVector& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

double dissim(const TermVector& u, const TermVector& v) { return 1.0 - cosine_similarity(u, v); }

namespace {

struct Ranked {
  double score;
  Eigen::Index index;
};

void take_top(std::vector<Ranked> ranked, std::size_t k, const Vocabulary& vocabulary, std::set<std::string>& out) {
  std::sort(ranked.begin(), ranked.end(), [&](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return vocabulary.term(a.index) < vocabulary.term(b.index);
  });
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) out.insert(vocabulary.term(ranked[i].index));
}

}  // namespace

std::vector<std::string> characterising_keywords(const MemberSet& members, const AuthorVectors& vectors,
                                                 const Vocabulary& vocabulary, std::size_t k) {
  if (k < 1) throw std::invalid_argument("characterising_keywords needs k >= 1");
  if (members.empty()) return {};
  TermVector tf(static_cast<Eigen::Index>(vectors.dimension()));
  for (const auto& a : members) tf += vectors.tf_of(a);
  const TermVector weights = centroid(members, vectors);

  std::vector<Ranked> by_tf;
  std::vector<Ranked> by_weight;
  for (TermVector::InnerIterator it(tf); it; ++it) {
    if (it.value() <= 0.0) continue;
    by_tf.push_back({it.value(), it.index()});
    by_weight.push_back({weights.coeff(it.index()), it.index()});
  }
  std::set<std::string> out;
  take_top(std::move(by_weight), k, vocabulary, out);
  take_top(std::move(by_tf), k, vocabulary, out);
  return {out.begin(), out.end()};
}

void write_centroid_row(std::ostream& out, const Centroid& centroid, const Vocabulary& vocabulary) {
  std::vector<Ranked> entries;
  for (TermVector::InnerIterator it(centroid.weights); it; ++it) {
    if (it.value() != 0.0) entries.push_back({it.value(), it.index()});
  }
  std::sort(entries.begin(), entries.end(), [&](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return vocabulary.term(a.index) < vocabulary.term(b.index);
  });
  out << centroid.community.window << '\t' << centroid.community.community << '\t';
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i > 0) out << ',';
    out << vocabulary.term(entries[i].index) << ':' << format_fixed(entries[i].score, 4);
  }
  out << '\n';
}

}  // namespace commtrace
