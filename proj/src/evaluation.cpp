#include "usuc/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "usuc/error.hpp"

namespace usuc {

std::vector<LabeledUtterance> load_test_set(std::istream& in) {
  std::vector<LabeledUtterance> set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
      line.pop_back();
    }
    if (line.empty() || normalize_tokens(line).empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw data_error("test set line " + std::to_string(line_no) +
                       ": missing TAB separator");
    }
    LabeledUtterance u;
    u.tokens = normalize_tokens(std::string_view(line).substr(0, tab));
    if (u.tokens.empty()) {
      throw data_error("test set line " + std::to_string(line_no) +
                       ": blank utterance");
    }
    std::string gold = line.substr(tab + 1);
    while (!gold.empty() && (gold.back() == ' ' || gold.back() == '\t')) gold.pop_back();
    while (!gold.empty() && (gold.front() == ' ' || gold.front() == '\t')) {
      gold.erase(gold.begin());
    }
    if (gold.empty()) {
      throw data_error("test set line " + std::to_string(line_no) +
                       ": blank gold intent");
    }
    u.gold_intent = std::move(gold);
    set.push_back(std::move(u));
  }
  return set;
}

EvalReport evaluate_cer(const ParaphraseIndex& index,
                        std::span<const LabeledUtterance> test_set,
                        double threshold, bool exclude_rejects) {
  if (test_set.empty()) throw data_error("evaluate_cer: empty test set");

  std::set<std::string_view> known_intents;
  for (const RegistryEntry& e : index.registry().entries) {
    known_intents.insert(e.intent);
  }

  EvalReport report;
  report.input_count = test_set.size();
  report.exclude_rejects = exclude_rejects;

  std::set<std::string> unknown;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<RoutingDecision> decisions;
  decisions.reserve(test_set.size());
  for (const LabeledUtterance& u : test_set) {
    decisions.push_back(classify(index, u.tokens, threshold));
  }
  const auto t1 = std::chrono::steady_clock::now();

  for (std::size_t i = 0; i < test_set.size(); ++i) {
    const LabeledUtterance& u = test_set[i];
    const RoutingDecision& d = decisions[i];
    const bool wrong = d.intent != u.gold_intent;
    if (!d.accepted) ++report.rejected;
    if (!d.accepted || wrong) ++report.errors_with_rejects;
    if (d.accepted && wrong) ++report.errors_excluding_rejects;
    if (known_intents.find(u.gold_intent) == known_intents.end()) {
      unknown.insert(u.gold_intent);
    }
    const bool scored = !exclude_rejects || d.accepted;
    if (scored) {
      IntentStats& s = report.per_intent[u.gold_intent];
      ++s.total;
      const bool counted_error = exclude_rejects ? wrong : (!d.accepted || wrong);
      if (counted_error) ++s.errors;
    }
  }

  const std::uint64_t scored_with = report.input_count;
  const std::uint64_t scored_excl = report.input_count - report.rejected;
  report.cer_with_rejects =
      static_cast<double>(report.errors_with_rejects) / static_cast<double>(scored_with);
  report.cer_excluding_rejects =
      scored_excl == 0 ? 0.0
                       : static_cast<double>(report.errors_excluding_rejects) /
                             static_cast<double>(scored_excl);

  report.total = exclude_rejects ? scored_excl : scored_with;
  report.errors = exclude_rejects ? report.errors_excluding_rejects
                                  : report.errors_with_rejects;
  report.cer = exclude_rejects ? report.cer_excluding_rejects : report.cer_with_rejects;

  report.wall_time_sec = std::chrono::duration<double>(t1 - t0).count();
  report.throughput_ups =
      report.wall_time_sec > 0.0
          ? static_cast<double>(report.total) / report.wall_time_sec
          : 0.0;
  report.unknown_gold_intents.assign(unknown.begin(), unknown.end());
  return report;
}

BenchReport benchmark_throughput(const ParaphraseIndex& index,
                                 std::span<const TokenSeq> utterances,
                                 std::uint32_t repetitions, double threshold) {
  if (utterances.empty()) throw data_error("benchmark_throughput: no utterances");
  if (repetitions == 0) throw usage_error("benchmark_throughput: repetitions must be >= 1");
  if (utterances.size() < 100 && repetitions < 3) {
    throw usage_error(
        "benchmark_throughput: measurement floor not met (need >= 100 "
        "utterances or >= 3 repetitions)");
  }

  BenchReport report;
  report.utterances = utterances.size();
  report.repetitions = repetitions;
  for (std::uint32_t rep = 0; rep < repetitions; ++rep) {
    double checksum = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (const TokenSeq& u : utterances) {
      checksum += classify(index, u, threshold).score;
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    report.per_rep_ups.push_back(
        secs > 0.0 ? static_cast<double>(utterances.size()) / secs : 0.0);
    report.score_checksum = checksum;
  }

  std::vector<double> sorted = report.per_rep_ups;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  report.median_ups = sorted.size() % 2 == 1
                          ? sorted[mid]
                          : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return report;
}

double throughput_ratio(const BenchReport& a, const BenchReport& b) {
  return b.median_ups > 0.0 ? a.median_ups / b.median_ups : 0.0;
}

}  // namespace usuc
