#ifndef USUC_EVALUATION_HPP
#define USUC_EVALUATION_HPP

#include <cstdint>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "usuc/classifier.hpp"
#include "usuc/text.hpp"

namespace usuc {

struct LabeledUtterance {
  TokenSeq tokens;
  std::string gold_intent;
};

// Reads the test set TSV: `utterance<TAB>gold_intent` per line.
std::vector<LabeledUtterance> load_test_set(std::istream& in);

struct IntentStats {
  std::uint64_t total = 0;
  std::uint64_t errors = 0;
};

// Classification error rate report. Both reject accounting modes are always
// computed; `total`, `errors` and `cer` reflect the selected headline mode.
struct EvalReport {
  std::uint64_t total = 0;   // scored utterances
  std::uint64_t errors = 0;  // wrong intent (plus rejects unless excluded)
  double cer = 0.0;          // errors / total
  std::uint64_t rejected = 0;
  std::map<std::string, IntentStats> per_intent;  // by gold intent, scored set
  double wall_time_sec = 0.0;
  double throughput_ups = 0.0;

  std::uint64_t input_count = 0;
  bool exclude_rejects = false;
  std::uint64_t errors_with_rejects = 0;
  double cer_with_rejects = 0.0;
  std::uint64_t errors_excluding_rejects = 0;
  double cer_excluding_rejects = 0.0;  // over accepted utterances only

  // Gold intents never seen in the registry; such utterances always score
  // as errors.
  std::vector<std::string> unknown_gold_intents;
};

// Scores every utterance with the index's strategy. A rejected utterance
// (score < threshold) counts as an error by default: a call routed to a
// human is a failed automation. Wall time covers classification only, not
// table/LM load or paraphrase indexing.
EvalReport evaluate_cer(const ParaphraseIndex& index,
                        std::span<const LabeledUtterance> test_set,
                        double threshold, bool exclude_rejects = false);

struct BenchReport {
  double median_ups = 0.0;  // utterances/sec, median over repetitions
  std::vector<double> per_rep_ups;
  std::uint64_t utterances = 0;
  std::uint32_t repetitions = 0;
  double score_checksum = 0.0;  // keeps the classify loop observable
};

// Times embed+classify end to end, single-threaded, monotonic clock.
// Requires at least 100 utterances or at least 3 repetitions.
BenchReport benchmark_throughput(const ParaphraseIndex& index,
                                 std::span<const TokenSeq> utterances,
                                 std::uint32_t repetitions,
                                 double threshold = 0.0);

// Speed ratio a/b for two reports measured on identical inputs.
double throughput_ratio(const BenchReport& a, const BenchReport& b);

}  // namespace usuc

#endif  // USUC_EVALUATION_HPP
