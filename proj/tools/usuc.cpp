// usuc: unsupervised spoken-utterance classification runtime.
//
// Subcommands: build-table, build-lm, classify, eval, bench, serve.
// Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 runtime error.

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

#include "usuc/backoff_lm.hpp"
#include "usuc/classifier.hpp"
#include "usuc/embedder.hpp"
#include "usuc/embedding_table.hpp"
#include "usuc/error.hpp"
#include "usuc/evaluation.hpp"
#include "usuc/kernels.hpp"
#include "usuc/text.hpp"

using nlohmann::ordered_json;

namespace {

using namespace usuc;

struct RuntimeConfig {
  std::string table_path;
  std::string arpa_path;
  std::string registry_path;
  std::string strategy = "lookup-ngram";
  std::string index_strategy;  // empty: same as strategy
  std::uint32_t n = 2;
  std::uint32_t dim = 0;
  double threshold = 0.0;
  std::uint64_t seed = 1;
  std::string listen = "127.0.0.1:8080";
  std::uint32_t reps = 3;
  double delay_ms = 0.0;
  bool exclude_rejects = false;
  std::string config_path;
};

// Option handles needed to give CLI flags precedence over config-file keys.
struct ConfigBindings {
  std::map<std::string, CLI::Option*> by_key;
};

void add_common_options(CLI::App* cmd, RuntimeConfig& rc, ConfigBindings& b) {
  b.by_key["table"] = cmd->add_option("--table", rc.table_path, "binary n-gram table path");
  b.by_key["arpa"] = cmd->add_option("--arpa", rc.arpa_path, "ARPA back-off LM path");
  b.by_key["registry"] =
      cmd->add_option("--registry", rc.registry_path, "intent/paraphrase TSV path");
  b.by_key["strategy"] = cmd->add_option(
      "--strategy", rc.strategy,
      "embedding strategy: direct-pseudo|lookup-word|lookup-ngram|lookup-ngram-backoff");
  b.by_key["index-strategy"] = cmd->add_option(
      "--index-strategy", rc.index_strategy,
      "strategy for paraphrase indexing when different from --strategy");
  b.by_key["n"] = cmd->add_option("--n", rc.n, "n-gram order for lookup strategies");
  b.by_key["dim"] = cmd->add_option("--dim", rc.dim, "embedding dimension (direct-pseudo)");
  b.by_key["threshold"] =
      cmd->add_option("--threshold", rc.threshold, "reject below this cosine score");
  b.by_key["seed"] = cmd->add_option("--seed", rc.seed, "pseudo-oracle seed");
  b.by_key["delay-ms"] = cmd->add_option(
      "--delay-ms", rc.delay_ms, "artificial per-call delay for direct-pseudo");
  cmd->add_option("--config", rc.config_path,
                  "key=value config file (USUC_CONFIG names a default)");
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("config file '" + path + "' is not readable");
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    std::string_view v(line);
    while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
    if (v.empty() || v.front() == '#') continue;
    const std::size_t eq = v.find('=');
    if (eq == std::string_view::npos) {
      throw usage_error("config '" + path + "' line " + std::to_string(line_no) +
                        ": expected key=value");
    }
    auto trim = [](std::string_view s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
      return std::string(s);
    };
    kv[trim(v.substr(0, eq))] = trim(v.substr(eq + 1));
  }
  return kv;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (errno != 0 || value.empty() || end != value.c_str() + value.size()) {
    throw usage_error("config key '" + key + "': bad unsigned value '" + value + "'");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(value.c_str(), &end);
  if (errno != 0 || value.empty() || end != value.c_str() + value.size()) {
    throw usage_error("config key '" + key + "': bad numeric value '" + value + "'");
  }
  return v;
}

// Defaults < config file < CLI flags.
void apply_config_file(RuntimeConfig& rc, const ConfigBindings& b) {
  std::string path = rc.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("USUC_CONFIG")) path = env;
  }
  if (path.empty()) return;
  const auto kv = read_config_file(path);
  auto overridden = [&](const std::string& key) {
    auto it = b.by_key.find(key);
    return it != b.by_key.end() && it->second->count() > 0;
  };
  for (const auto& [key, value] : kv) {
    if (overridden(key)) continue;
    if (key == "table") rc.table_path = value;
    else if (key == "arpa") rc.arpa_path = value;
    else if (key == "registry") rc.registry_path = value;
    else if (key == "strategy") rc.strategy = value;
    else if (key == "index-strategy") rc.index_strategy = value;
    else if (key == "n") rc.n = static_cast<std::uint32_t>(parse_unsigned(key, value));
    else if (key == "dim") rc.dim = static_cast<std::uint32_t>(parse_unsigned(key, value));
    else if (key == "threshold") rc.threshold = parse_real(key, value);
    else if (key == "seed") rc.seed = parse_unsigned(key, value);
    else if (key == "listen") rc.listen = value;
    else if (key == "reps") rc.reps = static_cast<std::uint32_t>(parse_unsigned(key, value));
    else if (key == "delay-ms") rc.delay_ms = parse_real(key, value);
    else if (key == "exclude-rejects") rc.exclude_rejects = (value == "1" || value == "true");
    else throw usage_error("config key '" + key + "' is not recognized");
  }
}

// Lazily loaded shared inputs.
struct Runtime {
  RuntimeConfig rc;
  std::shared_ptr<NgramTable> table;
  std::shared_ptr<BackoffModel> lm;

  const std::shared_ptr<NgramTable>& need_table() {
    if (table == nullptr) {
      if (rc.table_path.empty()) {
        throw usage_error("strategy '" + rc.strategy + "' requires --table");
      }
      table = std::make_shared<NgramTable>(NgramTable::open(rc.table_path));
      if (rc.dim != 0 && rc.dim != table->dim()) {
        throw usage_error("--dim " + std::to_string(rc.dim) + " does not match table dim " +
                          std::to_string(table->dim()));
      }
    }
    return table;
  }

  const std::shared_ptr<BackoffModel>& need_lm() {
    if (lm == nullptr) {
      if (rc.arpa_path.empty()) {
        throw usage_error("strategy 'lookup-ngram-backoff' requires --arpa");
      }
      std::ifstream in(rc.arpa_path);
      if (!in) throw data_error("cannot open ARPA file '" + rc.arpa_path + "'");
      std::vector<std::string> warnings;
      lm = std::make_shared<BackoffModel>(parse_arpa(in, &warnings));
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    }
    return lm;
  }

  SentenceEmbedder make_embedder(const std::string& name) {
    if (name == "direct-pseudo") {
      if (rc.dim == 0) throw usage_error("strategy 'direct-pseudo' requires --dim");
      std::shared_ptr<const EmbeddingOracle> oracle =
          std::make_shared<PseudoOracle>(rc.dim, rc.seed);
      if (rc.delay_ms > 0.0) {
        oracle = std::make_shared<DelayedOracle>(
            oracle, std::chrono::microseconds(
                        static_cast<std::int64_t>(rc.delay_ms * 1000.0)));
      }
      return SentenceEmbedder::direct(oracle);
    }
    if (name == "lookup-word") return SentenceEmbedder::lookup_word(need_table());
    if (name == "lookup-ngram") return SentenceEmbedder::lookup_ngram(need_table(), rc.n);
    if (name == "lookup-ngram-backoff") {
      return SentenceEmbedder::lookup_ngram_backoff(need_table(), need_lm(), rc.n);
    }
    throw usage_error("unknown strategy '" + name + "'");
  }

  IntentRegistry load_registry_file() {
    if (rc.registry_path.empty()) throw usage_error("--registry is required");
    std::ifstream in(rc.registry_path);
    if (!in) throw data_error("cannot open registry '" + rc.registry_path + "'");
    return load_registry(in);
  }
};

// Index plus the (possibly different) query-side embedder.
struct Pipeline {
  std::unique_ptr<ParaphraseIndex> index;
  std::optional<SentenceEmbedder> query;  // set only in mixed mode

  const SentenceEmbedder* query_embedder() const {
    return query.has_value() ? &*query : nullptr;
  }
};

Pipeline build_pipeline(Runtime& rt) {
  const std::string index_name =
      rt.rc.index_strategy.empty() ? rt.rc.strategy : rt.rc.index_strategy;
  Pipeline p;
  p.index = std::make_unique<ParaphraseIndex>(rt.load_registry_file(),
                                              rt.make_embedder(index_name));
  if (index_name != rt.rc.strategy) {
    p.query = rt.make_embedder(rt.rc.strategy);
    if (p.query->dim() != p.index->dim()) {
      throw usage_error("--strategy and --index-strategy produce different dimensions (" +
                        std::to_string(p.query->dim()) + " vs " +
                        std::to_string(p.index->dim()) + ")");
    }
  }
  for (std::size_t i : p.index->zero_vector_entries()) {
    const auto& e = p.index->registry().entries[i];
    std::cerr << "warning: paraphrase '" << canonical_key(e.paraphrase) << "' (intent "
              << e.intent << ") embedded to the zero vector\n";
  }
  return p;
}

ordered_json config_json(const Runtime& rt, const Pipeline* p) {
  ordered_json j;
  j["strategy"] = rt.rc.strategy;
  if (p != nullptr) j["index_strategy"] = p->index->embedder().descriptor();
  j["n"] = rt.rc.n;
  j["threshold"] = rt.rc.threshold;
  if (p != nullptr) j["dim"] = p->index->dim();
  if (rt.table != nullptr) {
    j["table"] = rt.rc.table_path;
    j["table_entries"] = rt.table->entry_count();
    j["table_max_order"] = rt.table->max_order();
  }
  if (!rt.rc.arpa_path.empty()) j["arpa"] = rt.rc.arpa_path;
  if (rt.rc.strategy == "direct-pseudo" || rt.rc.index_strategy == "direct-pseudo") {
    j["seed"] = rt.rc.seed;
    if (rt.rc.delay_ms > 0) j["delay_ms"] = rt.rc.delay_ms;
  }
  j["kernels"] = kernels::active().name;
  return j;
}

// One code path for batch classify lines and the /classify endpoint.
ordered_json classify_line(const Pipeline& p, const std::string& raw, double threshold) {
  ordered_json out;
  out["utterance"] = raw;
  try {
    TokenSeq tokens = normalize_tokens(raw);
    RoutingDecision d = classify(*p.index, tokens, threshold, p.query_embedder());
    out["intent"] = d.intent;
    out["paraphrase"] = d.paraphrase;
    out["score"] = d.score;
    out["accepted"] = d.accepted;
  } catch (const std::exception& e) {
    out["error"] = e.what();
  }
  return out;
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw data_error("cannot open input '" + path + "'");
  return f;
}

// ---------------------------------------------------------------- build-table

int cmd_build_table(Runtime& rt, const std::string& dump_path,
                    const std::string& out_path, const std::string& gen_vocab,
                    std::uint32_t order_override) {
  std::vector<TableEntry> entries;
  std::uint32_t dim = 0;
  std::uint32_t max_order = order_override;

  if (!gen_vocab.empty()) {
    if (rt.rc.dim == 0) throw usage_error("--gen-pseudo requires --dim");
    std::ifstream vf = open_input(gen_vocab);
    std::set<Token> vocab_set;
    std::string line;
    while (std::getline(vf, line)) {
      for (Token& t : normalize_tokens(line)) vocab_set.insert(std::move(t));
    }
    if (vocab_set.empty()) throw data_error("vocab file '" + gen_vocab + "' has no tokens");
    const TokenSeq vocab(vocab_set.begin(), vocab_set.end());
    const std::uint32_t n = rt.rc.n;
    dim = rt.rc.dim;
    if (max_order == 0) max_order = n;

    double total = 0;
    for (std::uint32_t k = 1; k <= n; ++k) {
      total += std::pow(static_cast<double>(vocab.size()), k);
    }
    if (total > 5e6) {
      throw usage_error("--gen-pseudo would generate too many n-grams; 5M is the limit");
    }

    PseudoOracle oracle(dim, rt.rc.seed);
    TokenSeq gram;
    // all k-grams over the vocab, k = 1..n
    std::vector<std::size_t> idx;
    for (std::uint32_t k = 1; k <= n; ++k) {
      idx.assign(k, 0);
      while (true) {
        gram.clear();
        for (std::size_t i : idx) gram.push_back(vocab[i]);
        entries.push_back(TableEntry{canonical_key(gram), oracle.embed(gram)});
        std::size_t pos = k;
        while (pos > 0) {
          if (++idx[pos - 1] < vocab.size()) break;
          idx[pos - 1] = 0;
          --pos;
        }
        if (pos == 0) break;
      }
    }
  } else {
    if (dump_path.empty()) {
      throw usage_error("build-table needs a dump path or --gen-pseudo");
    }
    std::ifstream in = open_input(dump_path);
    Dump dump = parse_text_dump(in);
    dim = dump.dim;
    entries = std::move(dump.entries);
    if (max_order == 0) {
      max_order = 1;
      for (const TableEntry& e : entries) {
        const auto toks = normalize_tokens(e.key);
        max_order = std::max<std::uint32_t>(max_order,
                                            static_cast<std::uint32_t>(toks.size()));
      }
    }
  }

  build_table(entries, dim, max_order, out_path);
  std::cout << "entry_count=" << entries.size() << " dim=" << dim
            << " max_order=" << max_order << " path=" << out_path << "\n";
  return 0;
}

// ------------------------------------------------------------------ build-lm

int cmd_build_lm(const std::string& corpus_path, const std::string& out_path,
                 std::uint32_t order) {
  std::ifstream in = open_input(corpus_path);
  std::vector<TokenSeq> corpus;
  std::string line;
  while (std::getline(in, line)) {
    TokenSeq tokens = normalize_tokens(line);
    if (!tokens.empty()) corpus.push_back(std::move(tokens));
  }
  BackoffModel model = build_mini_lm(corpus, order);
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw usuc::runtime_error("cannot open '" + out_path + "' for writing");
  write_arpa(model, out);
  out.flush();
  if (!out) throw usuc::runtime_error("write failed for '" + out_path + "'");

  std::cout << "order=" << model.order;
  for (std::uint32_t k = 1; k <= model.order; ++k) {
    std::cout << (k == 1 ? " ngrams=" : ",") << model.tables[k - 1].size();
  }
  std::cout << " path=" << out_path << "\n";
  return 0;
}

// ------------------------------------------------------------------ classify

int cmd_classify(Runtime& rt, const std::string& input_path) {
  Pipeline p = build_pipeline(rt);
  std::vector<std::string> lines;
  if (input_path.empty()) {
    lines = read_lines(std::cin);
  } else {
    std::ifstream f = open_input(input_path);
    lines = read_lines(f);
  }
  for (const std::string& raw : lines) {
    std::cout << classify_line(p, raw, rt.rc.threshold).dump() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------- eval

int cmd_eval(Runtime& rt, const std::string& test_path) {
  Pipeline p = build_pipeline(rt);
  if (p.query.has_value()) {
    // evaluate_cer drives the index's embedder; a mixed query strategy
    // would silently score a different space
    throw usage_error("eval does not support --index-strategy mixed mode");
  }
  std::ifstream f = open_input(test_path);
  const auto test_set = load_test_set(f);
  EvalReport r = evaluate_cer(*p.index, test_set, rt.rc.threshold, rt.rc.exclude_rejects);

  ordered_json j;
  j["total"] = r.total;
  j["errors"] = r.errors;
  j["cer"] = r.cer;
  j["rejected"] = r.rejected;
  ordered_json per = ordered_json::object();
  for (const auto& [intent, stats] : r.per_intent) {
    per[intent] = ordered_json{{"total", stats.total}, {"errors", stats.errors}};
  }
  j["per_intent"] = per;
  j["wall_time_sec"] = r.wall_time_sec;
  j["throughput_ups"] = r.throughput_ups;
  j["config"] = config_json(rt, &p);
  j["input_count"] = r.input_count;
  j["exclude_rejects"] = r.exclude_rejects;
  j["cer_with_rejects"] = r.cer_with_rejects;
  j["errors_with_rejects"] = r.errors_with_rejects;
  j["cer_excluding_rejects"] = r.cer_excluding_rejects;
  j["errors_excluding_rejects"] = r.errors_excluding_rejects;
  j["unknown_gold_intents"] = r.unknown_gold_intents;
  std::cout << j.dump(2) << "\n";
  return 0;
}

// --------------------------------------------------------------------- bench

int cmd_bench(Runtime& rt, const std::string& input_path) {
  Pipeline p = build_pipeline(rt);
  std::ifstream f = open_input(input_path);
  std::vector<TokenSeq> utterances;
  for (const std::string& raw : read_lines(f)) {
    TokenSeq tokens = normalize_tokens(raw);
    if (!tokens.empty()) utterances.push_back(std::move(tokens));
  }
  BenchReport r = benchmark_throughput(*p.index, utterances, rt.rc.reps, rt.rc.threshold);

  ordered_json j;
  j["median_ups"] = r.median_ups;
  j["per_rep_ups"] = r.per_rep_ups;
  j["utterances"] = r.utterances;
  j["repetitions"] = r.repetitions;
  j["score_checksum"] = r.score_checksum;
  j["config"] = config_json(rt, &p);
  std::cout << j.dump(2) << "\n";
  return 0;
}

// --------------------------------------------------------------------- serve

std::pair<std::string, int> parse_listen(const std::string& listen) {
  const std::size_t colon = listen.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= listen.size()) {
    throw usage_error("--listen expects host:port, got '" + listen + "'");
  }
  const std::string host = listen.substr(0, colon);
  const std::string port_str = listen.substr(colon + 1);
  char* end = nullptr;
  const long port = std::strtol(port_str.c_str(), &end, 10);
  if (end != port_str.c_str() + port_str.size() || port < 0 || port > 65535) {
    throw usage_error("--listen has a bad port '" + port_str + "'");
  }
  return {host, static_cast<int>(port)};
}

int cmd_serve(Runtime& rt) {
  Pipeline p = build_pipeline(rt);
  const auto [host, port] = parse_listen(rt.rc.listen);
  const double threshold = rt.rc.threshold;

  httplib::Server server;
  server.Get("/health", [&](const httplib::Request&, httplib::Response& res) {
    ordered_json j;
    j["status"] = "ok";
    j["entries"] = rt.table != nullptr
                       ? rt.table->entry_count()
                       : static_cast<std::uint64_t>(p.index->registry().entries.size());
    j["strategy"] = p.index->embedder().descriptor();
    res.set_content(j.dump(), "application/json");
  });
  server.Post("/classify", [&](const httplib::Request& req, httplib::Response& res) {
    ordered_json body = ordered_json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("utterance") ||
        !body["utterance"].is_string()) {
      res.status = 400;
      res.set_content(ordered_json{{"error", "body must be {\"utterance\": string}"}}.dump(),
                      "application/json");
      return;
    }
    const std::string raw = body["utterance"].get<std::string>();
    ordered_json out = classify_line(p, raw, threshold);
    if (out.contains("error")) {
      res.status = 400;
      res.set_content(out.dump(), "application/json");
      return;
    }
    res.set_content(out.dump(), "application/json");
  });

  int bound_port = port;
  if (port == 0) {
    bound_port = server.bind_to_any_port(host);
    if (bound_port <= 0) throw usuc::runtime_error("cannot bind to " + host);
  } else if (!server.bind_to_port(host, port)) {
    throw usuc::runtime_error("cannot bind to " + host + ":" + std::to_string(port));
  }
  std::cout << "listening on http://" << host << ":" << bound_port << std::endl;
  if (!server.listen_after_bind()) {
    throw usuc::runtime_error("server loop terminated abnormally");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unsupervised spoken-utterance classification runtime"};
  app.require_subcommand(1);

  RuntimeConfig rc;
  // Config-file overlay checks CLI option counts, so each subcommand keeps
  // its own option handles.
  std::map<const CLI::App*, ConfigBindings> bindings;

  // build-table
  auto* bt = app.add_subcommand("build-table", "build a binary n-gram embedding table");
  std::string bt_dump;
  std::string bt_out;
  std::string bt_gen;
  std::uint32_t bt_order = 0;
  bt->add_option("dump", bt_dump, "text dump path (omit with --gen-pseudo)");
  bt->add_option("out", bt_out, "output table path");
  bt->add_option("--gen-pseudo", bt_gen,
                 "generate entries for all 1..n-grams of this vocab file");
  bt->add_option("--order", bt_order, "max key order (default: longest key, or --n)");
  add_common_options(bt, rc, bindings[bt]);

  // build-lm
  auto* bl = app.add_subcommand("build-lm", "build a Witten-Bell back-off LM as ARPA");
  std::string bl_corpus;
  std::string bl_out;
  std::uint32_t bl_order = 2;
  bl->add_option("corpus", bl_corpus, "corpus path, one sentence per line")->required();
  bl->add_option("out", bl_out, "output ARPA path")->required();
  bl->add_option("--order", bl_order, "LM order");
  add_common_options(bl, rc, bindings[bl]);

  // classify
  auto* cl = app.add_subcommand("classify", "classify utterances, one JSON line each");
  std::string cl_input;
  cl->add_option("input", cl_input, "utterance file (default: stdin)");
  add_common_options(cl, rc, bindings[cl]);

  // eval
  auto* ev = app.add_subcommand("eval", "classification error rate on a labeled set");
  std::string ev_test;
  bool ev_exclude = false;
  ev->add_option("test", ev_test, "test TSV: utterance<TAB>gold_intent")->required();
  ev->add_flag("--exclude-rejects", ev_exclude, "score only accepted utterances");
  add_common_options(ev, rc, bindings[ev]);

  // bench
  auto* be = app.add_subcommand("bench", "throughput benchmark over an utterance file");
  std::string be_input;
  be->add_option("input", be_input, "utterance file")->required();
  bindings[be].by_key["reps"] = be->add_option("--reps", rc.reps, "repetitions (median)");
  add_common_options(be, rc, bindings[be]);

  // serve
  auto* sv = app.add_subcommand("serve", "HTTP classify service");
  bindings[sv].by_key["listen"] =
      sv->add_option("--listen", rc.listen, "host:port (port 0 picks a free port)");
  add_common_options(sv, rc, bindings[sv]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const CLI::App* parsed = app.get_subcommands().at(0);
    Runtime rt;
    if (bt->parsed()) {
      // gen mode takes a single positional: the output path
      if (!bt_gen.empty() && bt_out.empty() && !bt_dump.empty()) {
        bt_out = std::move(bt_dump);
        bt_dump.clear();
      }
      if (bt_out.empty()) throw usage_error("build-table needs an output path");
      apply_config_file(rc, bindings[parsed]);
      rt.rc = rc;
      return cmd_build_table(rt, bt_dump, bt_out, bt_gen, bt_order);
    }
    apply_config_file(rc, bindings[parsed]);
    rc.exclude_rejects = rc.exclude_rejects || ev_exclude;
    rt.rc = rc;
    if (bl->parsed()) return cmd_build_lm(bl_corpus, bl_out, bl_order);
    if (cl->parsed()) return cmd_classify(rt, cl_input);
    if (ev->parsed()) return cmd_eval(rt, ev_test);
    if (be->parsed()) return cmd_bench(rt, be_input);
    if (sv->parsed()) return cmd_serve(rt);
    throw usage_error("no subcommand selected");
  } catch (const UsucError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
