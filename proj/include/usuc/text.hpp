#ifndef USUC_TEXT_HPP
#define USUC_TEXT_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace usuc {

// A normalized token: non-empty, no whitespace, ASCII letters lowercased.
using Token = std::string;
using TokenSeq = std::vector<Token>;

// One normalization pipeline for everything that compares strings: table
// keys, LM tokens, paraphrases and utterances. Splits on ASCII whitespace
// and lowercases A-Z; other bytes (including multi-byte UTF-8) pass through.
TokenSeq normalize_tokens(std::string_view text);

// Canonical n-gram key: tokens joined by a single space.
std::string canonical_key(std::span<const Token> tokens);

// Appends the canonical form of tokens[first, first+count) to out (which is
// cleared first). Avoids reallocation in lookup loops.
void canonical_key_into(std::span<const Token> tokens, std::size_t first,
                        std::size_t count, std::string& out);

}  // namespace usuc

#endif  // USUC_TEXT_HPP
