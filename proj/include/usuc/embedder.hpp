#ifndef USUC_EMBEDDER_HPP
#define USUC_EMBEDDER_HPP

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "usuc/backoff_lm.hpp"
#include "usuc/embedding_table.hpp"
#include "usuc/text.hpp"

namespace usuc {

// Anything that maps a token sequence to a fixed-dimension vector. Must be
// deterministic and always return finite values of length dim().
class EmbeddingOracle {
 public:
  virtual ~EmbeddingOracle() = default;
  virtual std::uint32_t dim() const = 0;
  virtual std::string name() const = 0;
  virtual std::vector<float> embed(std::span<const Token> tokens) const = 0;
};

// Deterministic stand-in for a neural sentence embedder: elements come from
// a 64-bit avalanche hash of (seed, canonical key, element index), mapped to
// [-1, 1) and L2-normalized. Identical inputs produce identical vectors on
// every platform.
class PseudoOracle : public EmbeddingOracle {
 public:
  PseudoOracle(std::uint32_t dim, std::uint64_t seed);

  std::uint32_t dim() const override { return dim_; }
  std::string name() const override;
  std::vector<float> embed(std::span<const Token> tokens) const override;

 private:
  std::uint32_t dim_;
  std::uint64_t seed_;
};

// Wraps another oracle and sleeps before each call. Models an expensive
// per-utterance embedding model in benchmarks.
class DelayedOracle : public EmbeddingOracle {
 public:
  DelayedOracle(std::shared_ptr<const EmbeddingOracle> inner,
                std::chrono::microseconds delay);

  std::uint32_t dim() const override { return inner_->dim(); }
  std::string name() const override;
  std::vector<float> embed(std::span<const Token> tokens) const override;

 private:
  std::shared_ptr<const EmbeddingOracle> inner_;
  std::chrono::microseconds delay_;
};

// A sentence embedding strategy: delegate whole sentences to an oracle, or
// average-pool vectors fetched from an n-gram lookup table, shrinking missed
// grams to their suffix (optionally weighted by LM back-off scores on the
// way down). Pure and immutable; safe for concurrent callers.
class SentenceEmbedder {
 public:
  static SentenceEmbedder direct(std::shared_ptr<const EmbeddingOracle> oracle);
  static SentenceEmbedder lookup_word(std::shared_ptr<const NgramTable> table);
  static SentenceEmbedder lookup_ngram(std::shared_ptr<const NgramTable> table,
                                       std::uint32_t n);
  static SentenceEmbedder lookup_ngram_backoff(
      std::shared_ptr<const NgramTable> table,
      std::shared_ptr<const BackoffModel> lm, std::uint32_t n);

  std::uint32_t dim() const;
  std::string descriptor() const;
  const NgramTable* table() const { return table_.get(); }

  // Throws on an empty token sequence; otherwise always returns a finite
  // vector of length dim() (all-miss sentences pool to the zero vector).
  std::vector<float> embed(std::span<const Token> tokens) const;

 private:
  enum class Kind { direct, lookup_word, lookup_ngram, lookup_ngram_backoff };

  SentenceEmbedder(Kind kind, std::shared_ptr<const EmbeddingOracle> oracle,
                   std::shared_ptr<const NgramTable> table,
                   std::shared_ptr<const BackoffModel> lm, std::uint32_t n);

  std::vector<float> embed_pooled(std::span<const Token> tokens) const;

  Kind kind_;
  std::shared_ptr<const EmbeddingOracle> oracle_;
  std::shared_ptr<const NgramTable> table_;
  std::shared_ptr<const BackoffModel> lm_;
  std::uint32_t n_ = 1;
  std::optional<std::span<const float>> unk_;  // cached <unk> table entry
};

}  // namespace usuc

#endif  // USUC_EMBEDDER_HPP
