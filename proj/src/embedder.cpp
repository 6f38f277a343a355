#include "usuc/embedder.hpp"

#include <cmath>
#include <thread>

#include "usuc/error.hpp"
#include "usuc/kernels.hpp"

namespace usuc {

namespace {

constexpr std::string_view kUnkKey = "<unk>";

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

PseudoOracle::PseudoOracle(std::uint32_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim == 0) throw usage_error("PseudoOracle: dim must be >= 1");
}

std::string PseudoOracle::name() const {
  return "pseudo(dim=" + std::to_string(dim_) + ",seed=" + std::to_string(seed_) + ")";
}

std::vector<float> PseudoOracle::embed(std::span<const Token> tokens) const {
  if (tokens.empty()) throw data_error("embed: empty token sequence");
  const std::uint64_t base = mix64(seed_) ^ fnv1a64(canonical_key(tokens));
  std::vector<double> raw(dim_);
  for (std::uint32_t j = 0; j < dim_; ++j) {
    const std::uint64_t h = mix64(base + (j + 1) * 0x9e3779b97f4a7c15ULL);
    raw[j] = static_cast<double>(h) / 9223372036854775808.0 - 1.0;  // [-1, 1)
  }
  double sq = 0.0;
  for (double v : raw) sq += v * v;
  if (sq == 0.0) {
    raw[0] = 1.0;
    sq = 1.0;
  }
  const double inv = 1.0 / std::sqrt(sq);
  std::vector<float> out(dim_);
  for (std::uint32_t j = 0; j < dim_; ++j) {
    out[j] = static_cast<float>(raw[j] * inv);
  }
  return out;
}

DelayedOracle::DelayedOracle(std::shared_ptr<const EmbeddingOracle> inner,
                             std::chrono::microseconds delay)
    : inner_(std::move(inner)), delay_(delay) {
  if (inner_ == nullptr) throw usage_error("DelayedOracle: null inner oracle");
}

std::string DelayedOracle::name() const {
  return "delayed(" + inner_->name() + "," +
         std::to_string(delay_.count() / 1000.0) + "ms)";
}

std::vector<float> DelayedOracle::embed(std::span<const Token> tokens) const {
  if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
  return inner_->embed(tokens);
}

SentenceEmbedder::SentenceEmbedder(Kind kind,
                                   std::shared_ptr<const EmbeddingOracle> oracle,
                                   std::shared_ptr<const NgramTable> table,
                                   std::shared_ptr<const BackoffModel> lm,
                                   std::uint32_t n)
    : kind_(kind),
      oracle_(std::move(oracle)),
      table_(std::move(table)),
      lm_(std::move(lm)),
      n_(n) {
  if (table_ != nullptr) {
    unk_ = table_->find(kUnkKey);
  }
}

SentenceEmbedder SentenceEmbedder::direct(
    std::shared_ptr<const EmbeddingOracle> oracle) {
  if (oracle == nullptr) throw usage_error("direct strategy: null oracle");
  return SentenceEmbedder(Kind::direct, std::move(oracle), nullptr, nullptr, 1);
}

SentenceEmbedder SentenceEmbedder::lookup_word(
    std::shared_ptr<const NgramTable> table) {
  if (table == nullptr) throw usage_error("lookup-word strategy: null table");
  return SentenceEmbedder(Kind::lookup_word, nullptr, std::move(table), nullptr, 1);
}

SentenceEmbedder SentenceEmbedder::lookup_ngram(
    std::shared_ptr<const NgramTable> table, std::uint32_t n) {
  if (table == nullptr) throw usage_error("lookup-ngram strategy: null table");
  if (n < 1) throw usage_error("lookup-ngram strategy: n must be >= 1");
  if (n > table->max_order()) {
    throw usage_error("lookup-ngram strategy: n=" + std::to_string(n) +
                      " exceeds table max_order=" + std::to_string(table->max_order()));
  }
  return SentenceEmbedder(Kind::lookup_ngram, nullptr, std::move(table), nullptr, n);
}

SentenceEmbedder SentenceEmbedder::lookup_ngram_backoff(
    std::shared_ptr<const NgramTable> table,
    std::shared_ptr<const BackoffModel> lm, std::uint32_t n) {
  if (table == nullptr) throw usage_error("lookup-ngram-backoff strategy: null table");
  if (lm == nullptr) throw usage_error("lookup-ngram-backoff strategy: null LM");
  if (n < 1) throw usage_error("lookup-ngram-backoff strategy: n must be >= 1");
  if (n > table->max_order()) {
    throw usage_error("lookup-ngram-backoff strategy: n=" + std::to_string(n) +
                      " exceeds table max_order=" + std::to_string(table->max_order()));
  }
  return SentenceEmbedder(Kind::lookup_ngram_backoff, nullptr, std::move(table),
                          std::move(lm), n);
}

std::uint32_t SentenceEmbedder::dim() const {
  return kind_ == Kind::direct ? oracle_->dim() : table_->dim();
}

std::string SentenceEmbedder::descriptor() const {
  switch (kind_) {
    case Kind::direct:
      return "direct(" + oracle_->name() + ")";
    case Kind::lookup_word:
      return "lookup-word";
    case Kind::lookup_ngram:
      return "lookup-ngram(n=" + std::to_string(n_) + ")";
    case Kind::lookup_ngram_backoff:
      return "lookup-ngram-backoff(n=" + std::to_string(n_) + ")";
  }
  return "?";
}

std::vector<float> SentenceEmbedder::embed(std::span<const Token> tokens) const {
  if (tokens.empty()) throw data_error("embed: empty token sequence");
  if (kind_ == Kind::direct) {
    std::vector<float> v = oracle_->embed(tokens);
    if (v.size() != oracle_->dim()) {
      throw usuc::runtime_error("oracle returned vector of wrong length");
    }
    return v;
  }
  return embed_pooled(tokens);
}

// Average pooling over the order-m grams of the sentence, m = min(n, N).
// A missed gram shrinks to its suffix until it hits the table, multiplying
// in the context's back-off weight at each shrink when an LM is attached;
// a missed unigram resolves to <unk> when stored, else contributes zero.
// Every position counts in the denominator.
std::vector<float> SentenceEmbedder::embed_pooled(
    std::span<const Token> tokens) const {
  const std::size_t count = tokens.size();
  const std::size_t m =
      kind_ == Kind::lookup_word ? 1 : std::min<std::size_t>(n_, count);

  std::vector<float> acc(table_->dim(), 0.0f);
  std::string key;
  for (std::size_t end = m - 1; end < count; ++end) {
    double weight = 1.0;
    std::size_t start = end + 1 - m;
    for (std::size_t k = m;; --k, ++start) {
      canonical_key_into(tokens, start, k, key);
      if (std::optional<std::span<const float>> vec = table_->find(key)) {
        kernels::axpy(static_cast<float>(weight), *vec, acc);
        break;
      }
      if (k == 1) {
        if (unk_.has_value()) {
          kernels::axpy(static_cast<float>(weight), *unk_, acc);
        }
        break;
      }
      if (kind_ == Kind::lookup_ngram_backoff) {
        canonical_key_into(tokens, start, k - 1, key);
        weight *= backoff_weight(*lm_, key);
      }
    }
  }
  const std::size_t positions = count - m + 1;
  kernels::scale(1.0f / static_cast<float>(positions), acc);
  return acc;
}

}  // namespace usuc
