#ifndef USUC_BACKOFF_LM_HPP
#define USUC_BACKOFF_LM_HPP

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "usuc/text.hpp"

namespace usuc {

struct LmEntry {
  double log10_prob = 0.0;
  std::optional<double> log10_bow;  // only where the ARPA file supplies one
};

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const {
    return std::hash<std::string_view>{}(s);
  }
};

using LmTable = std::unordered_map<std::string, LmEntry, StringHash, std::equal_to<>>;

// Back-off n-gram language model. Immutable by convention after parse or
// build; safe for concurrent readers.
struct BackoffModel {
  std::uint32_t order = 0;
  std::vector<LmTable> tables;  // tables[k-1]: canonical k-gram -> entry
  std::set<Token> vocab;        // unigram tokens, <unk> excluded

  const LmEntry* find(std::string_view canonical, std::uint32_t k) const {
    if (k == 0 || k > tables.size()) return nullptr;
    auto it = tables[k - 1].find(canonical);
    return it == tables[k - 1].end() ? nullptr : &it->second;
  }
};

// Parses standard ARPA text. Counts declared in \data\ must match section
// contents; parse failures report line numbers. Non-fatal oddities (e.g.
// positive log-probabilities) are appended to *warnings when given.
BackoffModel parse_arpa(std::istream& in,
                        std::vector<std::string>* warnings = nullptr);

// Emits the model in ARPA form, sections sorted by canonical key.
void write_arpa(const BackoffModel& model, std::ostream& out);

// Linear-domain back-off weight of a context: 10^log10_bow when the context
// is stored with a weight, 1.0 when stored without one or absent entirely.
// Always strictly positive.
double backoff_weight(const BackoffModel& model, std::string_view context);

// Full back-off query P(word | context), context truncated to order-1
// tokens. Unseen words resolve through <unk> when present, else 0.
double conditional_prob(const BackoffModel& model, std::span<const Token> context,
                        const Token& word);

// Builds a Witten-Bell smoothed back-off model from a tokenized corpus.
// The unigram table includes an <unk> entry carrying the unseen-word mass,
// so conditional probabilities sum to 1 over vocab + <unk> at every stored
// context. Sentence boundary tokens are not injected.
BackoffModel build_mini_lm(std::span<const TokenSeq> corpus, std::uint32_t order);

}  // namespace usuc

#endif  // USUC_BACKOFF_LM_HPP
