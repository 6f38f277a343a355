#include "usuc/text.hpp"

namespace usuc {

namespace {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

inline char lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace

TokenSeq normalize_tokens(std::string_view text) {
  TokenSeq tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) {
      Token tok(text.substr(start, i - start));
      for (char& c : tok) c = lower(c);
      tokens.push_back(std::move(tok));
    }
  }
  return tokens;
}

std::string canonical_key(std::span<const Token> tokens) {
  std::string out;
  canonical_key_into(tokens, 0, tokens.size(), out);
  return out;
}

void canonical_key_into(std::span<const Token> tokens, std::size_t first,
                        std::size_t count, std::string& out) {
  out.clear();
  for (std::size_t i = 0; i < count; ++i) {
    if (i > 0) out.push_back(' ');
    out.append(tokens[first + i]);
  }
}

}  // namespace usuc
