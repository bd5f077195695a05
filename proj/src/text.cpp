#include "trove/text.hpp"

#include <cctype>
#include <cstdint>

namespace trove::text {

namespace {

// Returns the byte length of the whitespace sequence starting at s[i], or 0.
std::size_t whitespace_len(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 == ' ' || (b0 >= 0x09 && b0 <= 0x0d)) return 1;
  if (b0 < 0xc2) return 0;
  const std::size_t rest = s.size() - i;
  if (b0 == 0xc2 && rest >= 2) {
    const auto b1 = static_cast<unsigned char>(s[i + 1]);
    return (b1 == 0x85 || b1 == 0xa0) ? 2 : 0;
  }
  if (rest < 3) return 0;
  const auto b1 = static_cast<unsigned char>(s[i + 1]);
  const auto b2 = static_cast<unsigned char>(s[i + 2]);
  if (b0 == 0xe1 && b1 == 0x9a && b2 == 0x80) return 3;  // U+1680
  if (b0 == 0xe2 && b1 == 0x80) {
    if (b2 >= 0x80 && b2 <= 0x8a) return 3;                // U+2000..U+200A
    if (b2 == 0xa8 || b2 == 0xa9 || b2 == 0xaf) return 3;  // U+2028 U+2029 U+202F
    return 0;
  }
  if (b0 == 0xe2 && b1 == 0x81 && b2 == 0x9f) return 3;  // U+205F
  if (b0 == 0xe3 && b1 == 0x80 && b2 == 0x80) return 3;  // U+3000
  return 0;
}

}  // namespace

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  std::size_t start = std::string_view::npos;
  while (i < s.size()) {
    const std::size_t ws = whitespace_len(s, i);
    if (ws > 0) {
      if (start != std::string_view::npos) {
        out.push_back(s.substr(start, i - start));
        start = std::string_view::npos;
      }
      i += ws;
    } else {
      if (start == std::string_view::npos) start = i;
      ++i;
    }
  }
  if (start != std::string_view::npos) out.push_back(s.substr(start));
  return out;
}

std::size_t count_words(std::string_view s) { return split_whitespace(s).size(); }

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> lower_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (auto tok : split_whitespace(s)) out.push_back(ascii_lower(tok));
  return out;
}

std::vector<std::string> normalized_words(std::string_view s) {
  std::vector<std::string> out;
  for (auto tok : split_whitespace(s)) {
    std::size_t b = 0;
    std::size_t e = tok.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(tok[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(tok[e - 1]))) --e;
    if (b < e) out.push_back(ascii_lower(tok.substr(b, e - b)));
  }
  return out;
}

}  // namespace trove::text
