#pragma once

// Synthetic three-year corpus with one shift, one merge and one topic change.
//
// Every community is a clique: each year one citing document cites the
// single-author documents of all of its members. Keyword blocks are disjoint
// after stemming, so centroids of different blocks are orthogonal.
//
//   2000: S0 = s01..s22 (X)   M0 = m01..m10 (Z)   Q0 = q01..q30 (W)   C0 = c01..c10 (U)
//   2001: N1 = s01..s{k} (Y)  S1 = rest of s (X)  Q1 = q + m01..m09 (W) C1 (U)
//   2002: as 2001, except C2 = c01..c10 now writes about V
//
// X contains "retrieval" (IR camp), Y contains "semantic" (SW camp).

#include <filesystem>
#include <string>
#include <vector>

#include "commtrace/lifecycle.hpp"
#include "commtrace/netbuild.hpp"
#include "commtrace/topics.hpp"

namespace planted {

struct Corpus {
  std::vector<commtrace::CitationRecord> citations;
  std::vector<commtrace::DocumentMeta> docs;
  std::vector<commtrace::KeywordAssignment> keywords;
};

/// `shift_size` authors of S0 break away into N1 (10 in the default scenario).
Corpus make(std::size_t shift_size = 10);

commtrace::MemberSet authors(const std::string& prefix, std::size_t from, std::size_t to);

struct Scenario {
  commtrace::WindowSeries series;
  commtrace::Vocabulary vocabulary;

  /// Community of `author` in window `w`.
  commtrace::CommunityRef ref(std::size_t w, const std::string& author) const;
};

/// Runs build, builtin detection and topics in memory over 2000, 2001, 2002.
Scenario analyse(const Corpus& corpus);

/// Writes citations.tsv, docs.tsv, keywords.tsv and config.json (single-year
/// windows, builtin detector) into `dir`.
void write(const Corpus& corpus, const std::filesystem::path& dir, const std::string& extra_config = "");

}  // namespace planted
