#include "usuc/backoff_lm.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

#include "usuc/error.hpp"

namespace usuc {

namespace {

constexpr std::string_view kUnk = "<unk>";

[[noreturn]] void line_error(std::size_t line, const std::string& what) {
  throw data_error("arpa line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool parse_double(std::string_view s, double& out) {
  std::string buf(s);
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || errno == ERANGE) return false;
  out = v;
  return true;
}

std::string lowercase_token(std::string_view raw) {
  std::string t(raw);
  for (char& c : t) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return t;
}

std::string format_log10(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.8g", v);
  return buf;
}

// Strips trailing \r so CRLF files parse.
void chomp(std::string& line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
    line.pop_back();
  }
}

}  // namespace

BackoffModel parse_arpa(std::istream& in, std::vector<std::string>* warnings) {
  std::string line;
  std::size_t line_no = 0;

  bool saw_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    chomp(line);
    if (line == "\\data\\") {
      saw_data = true;
      break;
    }
  }
  if (!saw_data) throw data_error("arpa: missing \\data\\ header");

  // Declared counts per order.
  std::map<std::uint32_t, std::uint64_t> declared;
  while (std::getline(in, line)) {
    ++line_no;
    chomp(line);
    if (line.empty()) continue;
    if (line.rfind("ngram ", 0) == 0) {
      std::string_view rest = std::string_view(line).substr(6);
      std::size_t eq = rest.find('=');
      if (eq == std::string_view::npos) line_error(line_no, "malformed ngram count line");
      double k_val = 0;
      double c_val = 0;
      if (!parse_double(rest.substr(0, eq), k_val) ||
          !parse_double(rest.substr(eq + 1), c_val) || k_val < 1 ||
          k_val != std::floor(k_val) || c_val < 0 || c_val != std::floor(c_val)) {
        line_error(line_no, "malformed ngram count line");
      }
      declared[static_cast<std::uint32_t>(k_val)] = static_cast<std::uint64_t>(c_val);
      continue;
    }
    break;  // first section header (or junk) ends the \data\ block
  }
  if (declared.empty()) throw data_error("arpa: \\data\\ block declares no orders");

  const std::uint32_t order = declared.rbegin()->first;
  BackoffModel model;
  model.order = order;
  model.tables.resize(order);

  // `line` currently holds the first non-count line.
  bool have_line = !in.fail() || !line.empty();
  bool saw_end = false;
  while (have_line) {
    if (line.empty()) {
      have_line = static_cast<bool>(std::getline(in, line));
      if (have_line) {
        ++line_no;
        chomp(line);
      }
      continue;
    }
    if (line == "\\end\\") {
      saw_end = true;
      break;
    }
    std::uint32_t k = 0;
    {
      if (line.front() != '\\') line_error(line_no, "expected section header, got '" + line + "'");
      std::size_t dash = line.find("-grams:");
      double k_val = 0;
      if (dash == std::string::npos ||
          !parse_double(std::string_view(line).substr(1, dash - 1), k_val) ||
          k_val < 1 || k_val != std::floor(k_val)) {
        line_error(line_no, "malformed section header '" + line + "'");
      }
      k = static_cast<std::uint32_t>(k_val);
      if (k > order || declared.find(k) == declared.end()) {
        line_error(line_no, "section \\" + std::to_string(k) + "-grams: not declared in \\data\\");
      }
    }

    LmTable& table = model.tables[k - 1];
    have_line = false;
    while (std::getline(in, line)) {
      ++line_no;
      chomp(line);
      if (line.empty()) continue;
      if (line.front() == '\\') {
        have_line = true;
        break;
      }
      std::vector<std::string_view> fields = split_fields(line);
      if (fields.size() != k + 1 && fields.size() != k + 2) {
        line_error(line_no, "expected " + std::to_string(k + 1) + " or " +
                                std::to_string(k + 2) + " fields, got " +
                                std::to_string(fields.size()));
      }
      LmEntry entry;
      if (!parse_double(fields[0], entry.log10_prob)) {
        line_error(line_no, "malformed log10 probability '" + std::string(fields[0]) + "'");
      }
      if (entry.log10_prob > 0 && warnings != nullptr) {
        warnings->push_back("arpa line " + std::to_string(line_no) +
                            ": positive log10 probability " +
                            format_log10(entry.log10_prob));
      }
      if (fields.size() == k + 2) {
        double bow = 0;
        if (!parse_double(fields[k + 1], bow)) {
          line_error(line_no, "malformed log10 back-off weight '" +
                                  std::string(fields[k + 1]) + "'");
        }
        entry.log10_bow = bow;
      }
      std::string key;
      for (std::uint32_t t = 0; t < k; ++t) {
        if (t > 0) key.push_back(' ');
        key += lowercase_token(fields[1 + t]);
      }
      if (!table.emplace(std::move(key), entry).second) {
        line_error(line_no, "duplicate " + std::to_string(k) + "-gram");
      }
    }
  }
  if (!saw_end) throw data_error("arpa: missing \\end\\");

  for (const auto& [k, count] : declared) {
    const std::uint64_t parsed = model.tables[k - 1].size();
    if (parsed != count) {
      throw data_error("arpa: \\data\\ declares " + std::to_string(count) + " " +
                       std::to_string(k) + "-grams but " + std::to_string(parsed) +
                       " were listed");
    }
  }

  for (const auto& [key, entry] : model.tables[0]) {
    (void)entry;
    if (key != kUnk) model.vocab.insert(key);
  }
  return model;
}

void write_arpa(const BackoffModel& model, std::ostream& out) {
  out << "\\data\\\n";
  for (std::uint32_t k = 1; k <= model.order; ++k) {
    out << "ngram " << k << "=" << model.tables[k - 1].size() << "\n";
  }
  for (std::uint32_t k = 1; k <= model.order; ++k) {
    if (model.tables[k - 1].empty()) continue;
    out << "\n\\" << k << "-grams:\n";
    std::vector<const std::string*> keys;
    keys.reserve(model.tables[k - 1].size());
    for (const auto& kv : model.tables[k - 1]) keys.push_back(&kv.first);
    std::sort(keys.begin(), keys.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });
    for (const std::string* key : keys) {
      const LmEntry& e = model.tables[k - 1].at(*key);
      out << format_log10(e.log10_prob) << "\t" << *key;
      if (e.log10_bow.has_value()) out << "\t" << format_log10(*e.log10_bow);
      out << "\n";
    }
  }
  out << "\n\\end\\\n";
}

double backoff_weight(const BackoffModel& model, std::string_view context) {
  if (context.empty()) return 1.0;
  const std::uint32_t k = static_cast<std::uint32_t>(
      std::count(context.begin(), context.end(), ' ') + 1);
  const LmEntry* entry = model.find(context, k);
  if (entry == nullptr || !entry->log10_bow.has_value()) return 1.0;
  return std::pow(10.0, *entry->log10_bow);
}

double conditional_prob(const BackoffModel& model, std::span<const Token> context,
                        const Token& word) {
  std::size_t start = 0;
  if (model.order > 0 && context.size() > model.order - 1) {
    start = context.size() - (model.order - 1);
  }
  double weight = 1.0;
  std::string key;
  while (true) {
    const std::size_t ctx_len = context.size() - start;
    canonical_key_into(context, start, ctx_len, key);
    if (!key.empty()) key.push_back(' ');
    key.append(word);
    const LmEntry* entry =
        model.find(key, static_cast<std::uint32_t>(ctx_len + 1));
    if (entry != nullptr) return weight * std::pow(10.0, entry->log10_prob);
    if (ctx_len == 0) {
      const LmEntry* unk = model.find(kUnk, 1);
      return unk != nullptr ? weight * std::pow(10.0, unk->log10_prob) : 0.0;
    }
    canonical_key_into(context, start, ctx_len, key);
    weight *= backoff_weight(model, key);
    ++start;
  }
}

BackoffModel build_mini_lm(std::span<const TokenSeq> corpus, std::uint32_t order) {
  if (order == 0) throw data_error("build_mini_lm: order must be >= 1");

  using CountMap = std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>>;
  std::vector<CountMap> counts(order);
  bool any = false;
  std::string key;
  for (const TokenSeq& sentence : corpus) {
    if (sentence.empty()) continue;
    any = true;
    for (std::uint32_t k = 1; k <= order; ++k) {
      if (sentence.size() < k) break;
      for (std::size_t i = 0; i + k <= sentence.size(); ++i) {
        canonical_key_into(sentence, i, k, key);
        ++counts[k - 1][key];
      }
    }
  }
  if (!any) throw data_error("build_mini_lm: empty corpus");

  // Per-context continuation stats at each order k >= 2: total
  // continuations c(h), and the distinct follower words of h.
  struct CtxStat {
    std::uint64_t total = 0;
    std::vector<std::string> followers;
  };
  using CtxMap = std::unordered_map<std::string, CtxStat, StringHash, std::equal_to<>>;
  std::vector<CtxMap> ctx_stats(order + 1);  // ctx_stats[k]: contexts of k-grams
  for (std::uint32_t k = 2; k <= order; ++k) {
    for (const auto& [gram, c] : counts[k - 1]) {
      const std::size_t cut = gram.rfind(' ');
      CtxStat& s = ctx_stats[k][gram.substr(0, cut)];
      s.total += c;
      s.followers.push_back(gram.substr(cut + 1));
    }
  }

  BackoffModel model;
  model.order = order;
  model.tables.resize(order);

  // Unigrams: Witten-Bell over the whole corpus, unseen mass to <unk>.
  // A literal <unk> in the corpus keeps its own counts and additionally
  // absorbs the unseen mass, so the distribution still sums to 1.
  {
    std::uint64_t total = 0;
    std::uint64_t unk_count = 0;
    for (const auto& [w, c] : counts[0]) {
      total += c;
      if (w == kUnk) unk_count = c;
    }
    const std::uint64_t types = counts[0].size() - (unk_count > 0 ? 1 : 0);
    const double denom = static_cast<double>(total + types);
    for (const auto& [w, c] : counts[0]) {
      if (w == kUnk) continue;
      model.tables[0][w] = LmEntry{std::log10(static_cast<double>(c) / denom), {}};
      model.vocab.insert(w);
    }
    model.tables[0][std::string(kUnk)] =
        LmEntry{std::log10(static_cast<double>(unk_count + types) / denom), {}};
  }

  // Higher-order probabilities: P(w|h) = c(hw) / (c(h) + T(h)).
  for (std::uint32_t k = 2; k <= order; ++k) {
    for (const auto& [gram, c] : counts[k - 1]) {
      const std::size_t cut = gram.rfind(' ');
      const CtxStat& s = ctx_stats[k].at(gram.substr(0, cut));
      const double p = static_cast<double>(c) /
                       static_cast<double>(s.total + s.followers.size());
      model.tables[k - 1][gram] = LmEntry{std::log10(p), {}};
    }
  }

  // Back-off weights, bottom-up: the denominator queries at order k use the
  // weights finished in the k-1 pass.
  for (std::uint32_t k = 1; k < order; ++k) {
    for (auto& [h, entry] : model.tables[k - 1]) {
      auto it = ctx_stats[k + 1].find(h);
      if (it == ctx_stats[k + 1].end()) {
        entry.log10_bow = 0.0;  // never a context: weight 1
        continue;
      }
      const CtxStat& s = it->second;
      const double types = static_cast<double>(s.followers.size());
      const double numer = types / static_cast<double>(s.total + s.followers.size());
      TokenSeq h_tokens = normalize_tokens(h);
      std::span<const Token> lower_ctx = std::span<const Token>(h_tokens).subspan(1);
      double seen_lower = 0.0;
      for (const std::string& w : s.followers) {
        seen_lower += conditional_prob(model, lower_ctx, w);
      }
      const double denom = 1.0 - seen_lower;
      if (!(denom > 0.0)) {
        throw usuc::runtime_error(
            "build_mini_lm: degenerate back-off denominator at context '" + h + "'");
      }
      entry.log10_bow = std::log10(numer / denom);
    }
  }
  return model;
}

}  // namespace usuc
