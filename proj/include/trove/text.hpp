#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace trove::text {

/// Splits on Unicode whitespace (ASCII space/tab/newline/CR/VT/FF, U+0085,
/// U+00A0, U+1680, U+2000..U+200A, U+2028, U+2029, U+202F, U+205F, U+3000).
/// Views point into `s`. Invalid UTF-8 bytes are treated as token content.
std::vector<std::string_view> split_whitespace(std::string_view s);

std::size_t count_words(std::string_view s);

/// ASCII-only lowercase; non-ASCII bytes are passed through unchanged.
std::string ascii_lower(std::string_view s);

/// Lowercased whitespace tokens.
std::vector<std::string> lower_tokens(std::string_view s);

/// Lowercased tokens with leading/trailing ASCII punctuation stripped; tokens
/// that become empty are dropped.
std::vector<std::string> normalized_words(std::string_view s);

template <typename Tokens>
std::string join(const Tokens& tokens, std::string_view sep = " ") {
  std::string out;
  bool first = true;
  for (const auto& t : tokens) {
    if (!first) out.append(sep);
    out.append(std::string_view(t));
    first = false;
  }
  return out;
}

}  // namespace trove::text
