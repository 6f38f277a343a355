#ifndef USUC_CLASSIFIER_HPP
#define USUC_CLASSIFIER_HPP

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "usuc/embedder.hpp"
#include "usuc/text.hpp"

namespace usuc {

// Ordered (intent, paraphrase) pairs. Order matters: ties in classification
// resolve to the earliest entry.
struct RegistryEntry {
  std::string intent;
  TokenSeq paraphrase;
};

struct IntentRegistry {
  std::vector<RegistryEntry> entries;

  std::size_t intent_count() const;
};

// Reads the registry TSV: `intent<TAB>paraphrase` per line, `#` comments
// and blank lines ignored. Paraphrase tokens are normalized; duplicate
// (intent, paraphrase) pairs and blank fields are errors with line numbers.
IntentRegistry load_registry(std::istream& in);

// a.b / (|a||b|), clamped to [-1, 1]; 0 when either vector has zero norm.
float cosine_similarity(std::span<const float> a, std::span<const float> b);

// Precomputed paraphrase embeddings, one per registry entry in registry
// order. Immutable after construction; safe for concurrent classify calls.
class ParaphraseIndex {
 public:
  ParaphraseIndex(IntentRegistry registry, SentenceEmbedder embedder);

  const IntentRegistry& registry() const { return registry_; }
  const SentenceEmbedder& embedder() const { return embedder_; }
  std::span<const std::vector<float>> vectors() const { return vectors_; }
  std::uint32_t dim() const { return embedder_.dim(); }

  // Registry positions whose paraphrase embedded to the zero vector
  // (e.g. every token missing from the table).
  const std::vector<std::size_t>& zero_vector_entries() const {
    return zero_vector_entries_;
  }

 private:
  IntentRegistry registry_;
  SentenceEmbedder embedder_;
  std::vector<std::vector<float>> vectors_;
  std::vector<std::size_t> zero_vector_entries_;
};

inline ParaphraseIndex index_paraphrases(IntentRegistry registry,
                                         SentenceEmbedder embedder) {
  return ParaphraseIndex(std::move(registry), std::move(embedder));
}

struct RoutingDecision {
  std::string intent;
  std::string paraphrase;  // canonical form of the matched paraphrase
  double score = 0.0;      // in [-1, 1]
  bool accepted = false;   // score >= threshold
  std::size_t entry_index = 0;
};

// Nearest paraphrase under cosine similarity (KNN, K=1). Ties break to the
// lowest registry position. The utterance is embedded with query_embedder
// when given (mixed-mode), else with the index's own strategy.
RoutingDecision classify(const ParaphraseIndex& index,
                         std::span<const Token> utterance, double threshold,
                         const SentenceEmbedder* query_embedder = nullptr);

// Same selection over an already-embedded utterance.
RoutingDecision classify_vector(const ParaphraseIndex& index,
                                std::span<const float> utterance_vec,
                                double threshold);

}  // namespace usuc

#endif  // USUC_CLASSIFIER_HPP
