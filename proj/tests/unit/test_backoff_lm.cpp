#include "usuc/backoff_lm.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "usuc/error.hpp"

using namespace usuc;

namespace {

const char kMiniArpa[] =
    "\\data\\\n"
    "ngram 1=2\n"
    "ngram 2=1\n"
    "\n"
    "\\1-grams:\n"
    "-0.30103\tthe\t-0.1\n"
    "-0.69897\tcat\n"
    "\n"
    "\\2-grams:\n"
    "-0.15\tthe cat\n"
    "\n"
    "\\end\\\n";

// Sum of P(w | context) over the closed vocabulary plus <unk>.
double total_mass(const BackoffModel& m, std::span<const Token> context) {
  double sum = 0.0;
  for (const Token& w : m.vocab) sum += conditional_prob(m, context, w);
  sum += conditional_prob(m, context, "<unk>");
  return sum;
}

}  // namespace

TEST_CASE("parse_arpa reads a minimal model") {
  std::istringstream in(kMiniArpa);
  BackoffModel m = parse_arpa(in);
  CHECK(m.order == 2);
  CHECK(m.tables[0].size() == 2);
  CHECK(m.tables[1].size() == 1);
  CHECK(m.vocab == std::set<Token>{"cat", "the"});

  const LmEntry* the = m.find("the", 1);
  REQUIRE(the != nullptr);
  CHECK(the->log10_prob == doctest::Approx(-0.30103).epsilon(1e-12));
  REQUIRE(the->log10_bow.has_value());
  CHECK(*the->log10_bow == doctest::Approx(-0.1).epsilon(1e-12));

  const LmEntry* cat = m.find("cat", 1);
  REQUIRE(cat != nullptr);
  CHECK_FALSE(cat->log10_bow.has_value());
  CHECK(m.find("the cat", 2) != nullptr);
}

TEST_CASE("parse_arpa accepts space-separated fields and uppercase tokens") {
  std::istringstream in(
      "\\data\\\nngram 1=1\n\n\\1-grams:\n-0.30103  THE  -0.1\n\n\\end\\\n");
  BackoffModel m = parse_arpa(in);
  const LmEntry* the = m.find("the", 1);
  REQUIRE(the != nullptr);
  CHECK(*the->log10_bow == doctest::Approx(-0.1));
}

TEST_CASE("parse_arpa error cases") {
  SUBCASE("count mismatch") {
    std::istringstream in(
        "\\data\\\nngram 1=3\n\n\\1-grams:\n-0.3\ta\n-0.3\tb\n\n\\end\\\n");
    CHECK_THROWS_WITH_AS(parse_arpa(in), doctest::Contains("declares 3"), UsucError);
  }
  SUBCASE("missing data header") {
    std::istringstream in("\\1-grams:\n-0.3\ta\n\\end\\\n");
    CHECK_THROWS_WITH_AS(parse_arpa(in), doctest::Contains("\\data\\"), UsucError);
  }
  SUBCASE("missing end marker") {
    std::istringstream in("\\data\\\nngram 1=1\n\n\\1-grams:\n-0.3\ta\n");
    CHECK_THROWS_WITH_AS(parse_arpa(in), doctest::Contains("\\end\\"), UsucError);
  }
  SUBCASE("malformed line reports its number") {
    std::istringstream in(
        "\\data\\\nngram 1=1\n\n\\1-grams:\nnot-a-number a\n\n\\end\\\n");
    CHECK_THROWS_WITH_AS(parse_arpa(in), doctest::Contains("line 5"), UsucError);
  }
  SUBCASE("undeclared section") {
    std::istringstream in(
        "\\data\\\nngram 1=1\n\n\\1-grams:\n-0.3\ta\n\n\\2-grams:\n-0.1\ta b\n\n\\end\\\n");
    CHECK_THROWS_AS(parse_arpa(in), UsucError);
  }
}

TEST_CASE("positive log-probabilities warn instead of failing") {
  std::istringstream in(
      "\\data\\\nngram 1=1\n\n\\1-grams:\n0.5\t<s>\n\n\\end\\\n");
  std::vector<std::string> warnings;
  BackoffModel m = parse_arpa(in, &warnings);
  CHECK(m.tables[0].size() == 1);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("positive") != std::string::npos);
}

TEST_CASE("backoff_weight conversions") {
  std::istringstream in(kMiniArpa);
  BackoffModel m = parse_arpa(in);
  // 10^-0.1
  CHECK(backoff_weight(m, "the") == doctest::Approx(0.7943282347).epsilon(1e-9));
  CHECK(backoff_weight(m, "cat") == 1.0);    // stored without a weight
  CHECK(backoff_weight(m, "dog") == 1.0);    // absent entirely
  CHECK(backoff_weight(m, "the cat") == 1.0);
  CHECK(backoff_weight(m, "") == 1.0);

  BackoffModel zero;
  zero.order = 1;
  zero.tables.resize(1);
  zero.tables[0]["x"] = LmEntry{-0.5, 0.0};
  CHECK(backoff_weight(zero, "x") == 1.0);  // log10 bow of 0 is exactly 1

  BackoffModel half;
  half.order = 1;
  half.tables.resize(1);
  half.tables[0]["x"] = LmEntry{-0.5, -0.30103};
  // -0.30103 is log10(0.5) rounded to five decimals; the exact conversion
  // lands ~5e-9 away from one half
  CHECK(backoff_weight(half, "x") ==
        doctest::Approx(std::pow(10.0, -0.30103)).epsilon(1e-12));
  CHECK(backoff_weight(half, "x") == doctest::Approx(0.5).epsilon(1e-8));

  BackoffModel exact;
  exact.order = 1;
  exact.tables.resize(1);
  exact.tables[0]["x"] = LmEntry{-0.5, std::log10(0.5)};
  CHECK(backoff_weight(exact, "x") == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("conditional_prob walks the back-off chain") {
  std::istringstream in(kMiniArpa);
  BackoffModel m = parse_arpa(in);
  TokenSeq the{"the"};
  CHECK(conditional_prob(m, the, "cat") ==
        doctest::Approx(std::pow(10.0, -0.15)).epsilon(1e-12));
  // "the the" unseen: bow(the) * P(the)
  CHECK(conditional_prob(m, the, "the") ==
        doctest::Approx(std::pow(10.0, -0.1) * std::pow(10.0, -0.30103)).epsilon(1e-12));
  // unknown word, no <unk> entry
  CHECK(conditional_prob(m, the, "dog") == 0.0);
  CHECK(conditional_prob(m, {}, "cat") ==
        doctest::Approx(std::pow(10.0, -0.69897)).epsilon(1e-12));
}

TEST_CASE("build_mini_lm matches hand-computed Witten-Bell values") {
  // corpus: "a b", "a b", "a c"
  std::vector<TokenSeq> corpus{{"a", "b"}, {"a", "b"}, {"a", "c"}};
  BackoffModel m = build_mini_lm(corpus, 2);
  CHECK(m.order == 2);
  CHECK(m.vocab == std::set<Token>{"a", "b", "c"});

  // unigrams: counts a=3 b=2 c=1, total 6, 3 types
  CHECK(std::pow(10.0, m.find("a", 1)->log10_prob) == doctest::Approx(3.0 / 9.0).epsilon(1e-12));
  CHECK(std::pow(10.0, m.find("b", 1)->log10_prob) == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
  CHECK(std::pow(10.0, m.find("c", 1)->log10_prob) == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
  CHECK(std::pow(10.0, m.find("<unk>", 1)->log10_prob) == doctest::Approx(3.0 / 9.0).epsilon(1e-12));

  // bigrams after context a: c(a,b)=2 c(a,c)=1, c(a)=3, T(a)=2
  CHECK(std::pow(10.0, m.find("a b", 2)->log10_prob) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(std::pow(10.0, m.find("a c", 2)->log10_prob) == doctest::Approx(0.2).epsilon(1e-12));

  // bow(a) = (2/5) / (1 - (P(b)+P(c))) = 0.4 / (2/3) = 0.6
  CHECK(backoff_weight(m, "a") == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(backoff_weight(m, "b") == 1.0);
  CHECK(backoff_weight(m, "c") == 1.0);

  // P(b|a)+P(c|a)+backed-off mass sums to 1
  TokenSeq a{"a"};
  CHECK(total_mass(m, a) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(conditional_prob(m, a, "b") == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(conditional_prob(m, a, "a") == doctest::Approx(0.6 / 3.0).epsilon(1e-12));
}

TEST_CASE("build_mini_lm single-word corpus normalizes with unk mass") {
  std::vector<TokenSeq> corpus{{"x"}};
  BackoffModel m = build_mini_lm(corpus, 1);
  CHECK(m.order == 1);
  CHECK(std::pow(10.0, m.find("x", 1)->log10_prob) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::pow(10.0, m.find("<unk>", 1)->log10_prob) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(total_mass(m, {}) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("build_mini_lm rejects an empty corpus") {
  std::vector<TokenSeq> none;
  CHECK_THROWS_WITH_AS(build_mini_lm(none, 2), doctest::Contains("empty corpus"), UsucError);
  std::vector<TokenSeq> blanks{{}, {}};
  CHECK_THROWS_AS(build_mini_lm(blanks, 2), UsucError);
}

TEST_CASE("a literal <unk> in the corpus keeps the model normalized") {
  std::vector<TokenSeq> corpus{{"a", "<unk>"}, {"a", "b"}, {"<unk>", "b"}};
  BackoffModel m = build_mini_lm(corpus, 2);
  CHECK(m.vocab == std::set<Token>{"a", "b"});
  // <unk> holds its own counts plus the unseen mass: (2 + 2) / (6 + 2)
  CHECK(std::pow(10.0, m.find("<unk>", 1)->log10_prob) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(total_mass(m, {}) == doctest::Approx(1.0).epsilon(1e-6));
  TokenSeq a{"a"};
  CHECK(total_mass(m, a) == doctest::Approx(1.0).epsilon(1e-6));
  TokenSeq unk{"<unk>"};
  CHECK(total_mass(m, unk) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("orders above the longest sentence survive the round trip") {
  std::vector<TokenSeq> corpus{{"a", "b"}, {"b", "a"}};
  BackoffModel m = build_mini_lm(corpus, 3);
  CHECK(m.order == 3);
  CHECK(m.tables[2].empty());
  std::stringstream arpa;
  write_arpa(m, arpa);
  CHECK(arpa.str().find("ngram 3=0") != std::string::npos);
  BackoffModel parsed = parse_arpa(arpa);
  CHECK(parsed.order == 3);
  CHECK(parsed.tables[1].size() == m.tables[1].size());
}

TEST_CASE("ARPA round trip preserves the model within 1e-4") {
  std::mt19937_64 rng(61);
  auto vocab = testgen::make_vocab(8);
  std::vector<TokenSeq> corpus;
  for (int i = 0; i < 40; ++i) {
    corpus.push_back(testgen::random_sentence(rng, vocab, 1, 6));
  }
  BackoffModel built = build_mini_lm(corpus, 3);

  std::stringstream arpa;
  write_arpa(built, arpa);
  BackoffModel parsed = parse_arpa(arpa);

  REQUIRE(parsed.order == built.order);
  for (std::uint32_t k = 1; k <= built.order; ++k) {
    REQUIRE(parsed.tables[k - 1].size() == built.tables[k - 1].size());
    for (const auto& [key, entry] : built.tables[k - 1]) {
      const LmEntry* other = parsed.find(key, k);
      REQUIRE(other != nullptr);
      CHECK(std::abs(other->log10_prob - entry.log10_prob) < 1e-4);
      REQUIRE(other->log10_bow.has_value() == entry.log10_bow.has_value());
      if (entry.log10_bow.has_value()) {
        CHECK(std::abs(*other->log10_bow - *entry.log10_bow) < 1e-4);
      }
    }
  }
}

TEST_CASE("property: built models normalize at every stored context") {
  std::mt19937_64 rng(71);
  for (std::uint32_t order : {1u, 2u, 3u}) {
    auto vocab = testgen::make_vocab(order == 3 ? 6 : 10);
    std::vector<TokenSeq> corpus;
    for (int i = 0; i < 30; ++i) {
      corpus.push_back(testgen::random_sentence(rng, vocab, 1, 7));
    }
    BackoffModel m = build_mini_lm(corpus, order);

    // unigram level
    CHECK(total_mass(m, {}) == doctest::Approx(1.0).epsilon(1e-6));
    // every stored context of every lower order
    for (std::uint32_t k = 1; k < order; ++k) {
      for (const auto& [ctx, entry] : m.tables[k - 1]) {
        (void)entry;
        TokenSeq context = normalize_tokens(ctx);
        CHECK(total_mass(m, context) == doctest::Approx(1.0).epsilon(1e-6));
      }
    }
    // back-off weights are strictly positive
    for (std::uint32_t k = 1; k <= order; ++k) {
      for (const auto& [key, entry] : m.tables[k - 1]) {
        CHECK(backoff_weight(m, key) > 0.0);
      }
    }
  }
}
