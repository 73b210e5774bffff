#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rumor {

inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kMentionToken = "<mention>";

/// Lowercases, maps URLs to "<url>" and @-mentions to "<mention>", then
/// splits on whitespace and punctuation. Each ASCII punctuation character
/// becomes a token of its own; bytes >= 0x80 are word characters, so UTF-8
/// sequences are never split.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace rumor
