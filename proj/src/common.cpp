#include "commtrace/common.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>

namespace commtrace {

MemberSet make_member_set(std::vector<AuthorId> authors) {
  std::sort(authors.begin(), authors.end());
  authors.erase(std::unique(authors.begin(), authors.end()), authors.end());
  return authors;
}

std::size_t intersection_size(const MemberSet& a, const MemberSet& b) {
  std::size_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

MemberSet set_intersection(const MemberSet& a, const MemberSet& b) {
  MemberSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool contains(const MemberSet& set, const AuthorId& author) {
  return std::binary_search(set.begin(), set.end(), author);
}

FormatError::FormatError(const std::string& src, std::size_t ln, const std::string& what)
    : std::runtime_error(fmt::format("{}:{}: {}", src, ln, what)), source(src), line(ln) {}

FormatError::FormatError(const std::string& src, const std::string& what)
    : std::runtime_error(fmt::format("{}: {}", src, what)), source(src) {}

TemporalWindow::TemporalWindow(int start, int end) : start_year(start), end_year(end) {
  if (start > end) {
    throw InvalidConfig(fmt::format("window start {} after end {}", start, end));
  }
}

std::string TemporalWindow::label() const {
  if (start_year == end_year) return std::to_string(start_year);
  return fmt::format("{}–{}", start_year, end_year);
}

std::string to_string(const CommunityRef& ref) {
  return fmt::format("w{}:c{}", ref.window, ref.community);
}

CommunityRef parse_community_ref(const std::string& text) {
  // w<idx>:c<id>
  auto colon = text.find(':');
  if (text.size() < 5 || text[0] != 'w' || colon == std::string::npos ||
      colon + 1 >= text.size() || text[colon + 1] != 'c') {
    throw InvalidConfig("bad community reference '" + text + "', expected w<idx>:c<id>");
  }
  std::size_t window = 0;
  int community = 0;
  const char* end = text.data() + text.size();
  auto w = std::from_chars(text.data() + 1, text.data() + colon, window);
  auto c = std::from_chars(text.data() + colon + 2, end, community);
  if (w.ec != std::errc() || w.ptr != text.data() + colon || c.ec != std::errc() || c.ptr != end || community < 0) {
    throw InvalidConfig("bad community reference '" + text + "', expected w<idx>:c<id>");
  }
  return {window, community};
}

std::string format_fixed(double value, int decimals) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  auto text = fmt::format("{:.{}f}", value, decimals);
  // Avoid "-0.0000" in outputs.
  if (text.front() == '-' && text.find_first_not_of("-0.") == std::string::npos) {
    text.erase(0, 1);
  }
  return text;
}

std::string format_trimmed(double value, int decimals) {
  auto text = format_fixed(value, decimals);
  if (text.find('.') == std::string::npos) return text;
  while (text.back() == '0') text.pop_back();
  if (text.back() == '.') text.pop_back();
  return text;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
  // FNV-1a over the stream name keeps this stable across platforms.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t state = seed ^ h;
  splitmix64(state);
  state ^= index;
  return splitmix64(state);
}

}  // namespace commtrace
