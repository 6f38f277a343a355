#include "usuc/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "usuc/error.hpp"
#include "usuc/kernels.hpp"

namespace usuc {

std::size_t IntentRegistry::intent_count() const {
  std::set<std::string_view> intents;
  for (const RegistryEntry& e : entries) intents.insert(e.intent);
  return intents.size();
}

IntentRegistry load_registry(std::istream& in) {
  IntentRegistry registry;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') continue;
    if (normalize_tokens(line).empty()) continue;  // whitespace-only

    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw data_error("registry line " + std::to_string(line_no) +
                       ": missing TAB separator");
    }
    std::string intent = line.substr(0, tab);
    while (!intent.empty() && (intent.back() == ' ' || intent.back() == '\t')) {
      intent.pop_back();
    }
    while (!intent.empty() && (intent.front() == ' ' || intent.front() == '\t')) {
      intent.erase(intent.begin());
    }
    if (intent.empty()) {
      throw data_error("registry line " + std::to_string(line_no) +
                       ": blank intent label");
    }
    TokenSeq paraphrase = normalize_tokens(std::string_view(line).substr(tab + 1));
    if (paraphrase.empty()) {
      throw data_error("registry line " + std::to_string(line_no) +
                       ": blank paraphrase");
    }
    std::string pair_key = intent + "\t" + canonical_key(paraphrase);
    if (!seen.insert(pair_key).second) {
      throw data_error("registry line " + std::to_string(line_no) +
                       ": duplicate (intent, paraphrase) pair");
    }
    registry.entries.push_back(RegistryEntry{std::move(intent), std::move(paraphrase)});
  }
  if (registry.entries.empty()) {
    throw data_error("registry: no entries");
  }
  return registry;
}

float cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw usage_error("cosine_similarity: dimension mismatch (" +
                      std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  const float sq_a = kernels::squared_norm(a);
  const float sq_b = kernels::squared_norm(b);
  if (sq_a == 0.0f || sq_b == 0.0f) return 0.0f;
  const float d = kernels::dot(a, b);
  const float sim = d / (std::sqrt(sq_a) * std::sqrt(sq_b));
  return std::clamp(sim, -1.0f, 1.0f);
}

ParaphraseIndex::ParaphraseIndex(IntentRegistry registry, SentenceEmbedder embedder)
    : registry_(std::move(registry)), embedder_(std::move(embedder)) {
  vectors_.reserve(registry_.entries.size());
  for (std::size_t i = 0; i < registry_.entries.size(); ++i) {
    const RegistryEntry& entry = registry_.entries[i];
    try {
      vectors_.push_back(embedder_.embed(entry.paraphrase));
    } catch (const std::exception& e) {
      throw data_error("index_paraphrases: entry " + std::to_string(i) + " ('" +
                       entry.intent + "', '" + canonical_key(entry.paraphrase) +
                       "'): " + e.what());
    }
    if (kernels::squared_norm(vectors_.back()) == 0.0f) {
      zero_vector_entries_.push_back(i);
    }
  }
}

RoutingDecision classify(const ParaphraseIndex& index,
                         std::span<const Token> utterance, double threshold,
                         const SentenceEmbedder* query_embedder) {
  if (utterance.empty()) throw data_error("classify: empty utterance");
  const SentenceEmbedder& embedder =
      query_embedder != nullptr ? *query_embedder : index.embedder();
  const std::vector<float> vec = embedder.embed(utterance);
  return classify_vector(index, vec, threshold);
}

RoutingDecision classify_vector(const ParaphraseIndex& index,
                                std::span<const float> utterance_vec,
                                double threshold) {
  if (utterance_vec.size() != index.dim()) {
    throw usage_error("classify: utterance vector dimension " +
                      std::to_string(utterance_vec.size()) + " != index dimension " +
                      std::to_string(index.dim()));
  }
  const std::span<const std::vector<float>> vectors = index.vectors();
  if (vectors.empty()) throw usage_error("classify: index has no paraphrases");
  std::size_t best = 0;
  float best_score = -2.0f;  // below any cosine
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    const float score = cosine_similarity(utterance_vec, vectors[j]);
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  const RegistryEntry& entry = index.registry().entries[best];
  RoutingDecision decision;
  decision.intent = entry.intent;
  decision.paraphrase = canonical_key(entry.paraphrase);
  decision.score = static_cast<double>(best_score);
  decision.accepted = decision.score >= threshold;
  decision.entry_index = best;
  return decision;
}

}  // namespace usuc
