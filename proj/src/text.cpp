#include "rumor/text.hpp"

namespace rumor {
namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_word(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

void split_chunk(std::string_view chunk, std::vector<std::string>& out) {
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  for (std::size_t i = 0; i < chunk.size(); ++i) {
    const auto c = static_cast<unsigned char>(chunk[i]);
    if (c == '@' && i + 1 < chunk.size() && is_word(static_cast<unsigned char>(chunk[i + 1]))) {
      flush();
      while (i + 1 < chunk.size() && is_word(static_cast<unsigned char>(chunk[i + 1]))) ++i;
      out.emplace_back(kMentionToken);
    } else if (is_word(c)) {
      word.push_back(chunk[i]);
    } else {
      flush();
      out.emplace_back(1, chunk[i]);
    }
  }
  flush();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::string lowered(text);
  for (char& c : lowered) c = lower(c);
  std::string_view rest = lowered;

  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < rest.size()) {
    while (i < rest.size() && is_space(static_cast<unsigned char>(rest[i]))) ++i;
    std::size_t end = i;
    while (end < rest.size() && !is_space(static_cast<unsigned char>(rest[end]))) ++end;
    if (end == i) break;
    const std::string_view chunk = rest.substr(i, end - i);
    if (starts_with(chunk, "http://") || starts_with(chunk, "https://") || starts_with(chunk, "www.")) {
      tokens.emplace_back(kUrlToken);
    } else {
      split_chunk(chunk, tokens);
    }
    i = end;
  }
  return tokens;
}

}  // namespace rumor
