#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace commtrace {

/// Porter (1980) suffix stripping, following the reference C release
/// (including its "bli"->"ble" and "logi"->"log" step-2 rules).
/// Expects a lowercase token; words of length <= 2 are returned unchanged.
std::string stem_token(std::string_view token);

/// Lowercases, splits on ASCII non-alphanumerics, drops pure-digit and
/// single-character tokens. Bytes >= 0x80 stay inside tokens.
std::vector<std::string> tokenize(std::string_view text);

/// tokenize() followed by stem_token() on every token.
std::vector<std::string> stemmed_terms(std::string_view keyword);

}  // namespace commtrace
