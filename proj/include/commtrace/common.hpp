#pragma once

#include <algorithm>
#include <cstddef>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace commtrace {

using AuthorId = std::string;
using DocId = std::string;

/// Sorted, duplicate-free list of authors. All set helpers below assume this.
using MemberSet = std::vector<AuthorId>;

MemberSet make_member_set(std::vector<AuthorId> authors);

std::size_t intersection_size(const MemberSet& a, const MemberSet& b);
MemberSet set_intersection(const MemberSet& a, const MemberSet& b);
bool contains(const MemberSet& set, const AuthorId& author);

// Error kinds. Everything derives from std::runtime_error so callers that
// don't care can catch one type.
struct InvalidConfig : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  FormatError(const std::string& source, std::size_t line, const std::string& what);
  FormatError(const std::string& source, const std::string& what);
  std::string source;
  std::size_t line = 0;  // 1-based, 0 when not tied to a line
};

struct InvalidPair : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UndefinedFraction : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LookupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TemporalWindow {
  int start_year = 0;
  int end_year = 0;  // inclusive

  TemporalWindow() = default;
  TemporalWindow(int start, int end);

  bool contains(int year) const { return year >= start_year && year <= end_year; }
  int length() const { return end_year - start_year + 1; }

  /// "2000–2002" for ranges, "2009" for single years.
  std::string label() const;

  friend auto operator<=>(const TemporalWindow&, const TemporalWindow&) = default;
};

/// A community inside the window sequence: (window index, community id).
struct CommunityRef {
  std::size_t window = 0;
  int community = 0;

  friend auto operator<=>(const CommunityRef&, const CommunityRef&) = default;
};

std::string to_string(const CommunityRef& ref);  // "w3:c15"
CommunityRef parse_community_ref(const std::string& text);

// Number formatting shared by the writers.
std::string format_fixed(double value, int decimals);
/// Fixed notation with trailing zeros (and a dangling '.') removed.
std::string format_trimmed(double value, int decimals);

/// SplitMix64 step; used to derive independent per-stage seeds from one seed.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

}  // namespace commtrace
