#include <cctype>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"
#include "tribunal/valence.hpp"

using namespace tribunal;
using namespace oracles;
using testing_support::data_path;

namespace {

ValenceLexicon good_bad() {
  const std::vector<std::pair<std::string, double>> rows{{"good", 7.0}, {"bad", 3.0}};
  return ValenceLexicon::from_entries(rows);
}

}  // namespace

TEST_CASE("tokenize") {
  CHECK(tokenize("STFU NOOB!") == TokenizedText{"stfu", "noob"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("gg,noob...noob") == TokenizedText{"gg", "noob", "noob"});
  CHECK(tokenize("don't 'quote' it''s") == TokenizedText{"don't", "quote", "it''s"});
  CHECK(tokenize("caf\xc3\xa9 ok") == TokenizedText{"caf\xc3\xa9", "ok"});
  CHECK(tokenize("  \t\n ") .empty());
  for (const auto& t : tokenize("a b\tc\nd  e, f!g")) {
    CHECK_FALSE(t.empty());
    CHECK(t.find_first_of(" \t\n") == std::string::npos);
  }
}

TEST_CASE("score_text examples") {
  const ValenceLexicon lex = good_bad();
  CHECK(score_text(lex, "nothing here") == 0.0);
  CHECK(score_text(lex, "") == 0.0);
  CHECK(score_text(lex, "GOOD") == 7.0);
  CHECK(score_text(lex, "good good bad") == doctest::Approx(17.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(score_text(lex, "good, bad! good") - 5.6667) < 1e-4);
}

TEST_CASE("score_text agrees with a brute-force counter") {
  const ValenceLexicon& lex = builtin_lexicon();
  std::map<std::string, double> plain;
  std::vector<std::string> words;
  for (const auto& [w, s] : lex.entries()) {
    plain[w] = s;
    words.push_back(w);
  }
  std::mt19937_64 rng(2024);
  int zero_cases = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::string text = random_text(rng, words);
    const double expected = brute_force_score(plain, text);
    const double got = score_text(lex, text);
    CHECK(std::abs(got - expected) <= 1e-9);
    if (expected == 0.0) {
      ++zero_cases;
      CHECK(got == 0.0);
    } else {
      CHECK(got >= kMinValence);
      CHECK(got <= kMaxValence);
    }
  }
  CHECK(zero_cases > 0);
}

TEST_CASE("score_text properties") {
  const ValenceLexicon& lex = builtin_lexicon();
  std::vector<std::string> words;
  for (const auto& [w, s] : lex.entries()) words.push_back(w);
  std::mt19937_64 rng(77);
  for (int i = 0; i < 200; ++i) {
    const std::string a = random_text(rng, words), b = random_text(rng, words);
    const double sa = score_text(lex, a), sb = score_text(lex, b);
    CHECK(sa >= 0.0);
    CHECK(sa <= 9.0);

    // Concatenation order does not matter.
    CHECK(score_text(lex, a + " " + b) == score_text(lex, b + " " + a));

    // Repeating a text leaves its score unchanged.
    std::string rep;
    const int k = 1 + static_cast<int>(rng() % 5);
    for (int j = 0; j < k; ++j) rep += a + " ";
    CHECK(score_text(lex, rep) == doctest::Approx(sa).epsilon(1e-12));

    // Token permutation.
    auto tokens = tokenize(a);
    std::shuffle(tokens.begin(), tokens.end(), rng);
    CHECK(score_tokens(lex, tokens) == score_text(lex, a));

    // Mixing lands between the two scores.
    if (sa > 0.0 && sb > 0.0) {
      const double mixed = score_text(lex, a + " " + b);
      CHECK(mixed >= std::min(sa, sb) - 1e-12);
      CHECK(mixed <= std::max(sa, sb) + 1e-12);
    }
  }
}

TEST_CASE("role_valences") {
  const ValenceLexicon lex = good_bad();
  Match m;
  CHECK(role_valences(lex, m).all == 0.0);
  CHECK(role_valences(lex, m).offender == 0.0);

  m.chat = {{PlayerRole::Offender, "good"}};
  RoleValences v = role_valences(lex, m);
  CHECK(v.offender == 7.0);
  CHECK(v.allies == 0.0);
  CHECK(v.enemies == 0.0);
  CHECK(v.all == 7.0);

  m.chat.push_back({PlayerRole::Ally, "bad"});
  v = role_valences(lex, m);
  CHECK(v.offender == 7.0);
  CHECK(v.allies == 3.0);
  CHECK(v.all == 5.0);

  // Pooled over messages, not averaged per message.
  m.chat.push_back({PlayerRole::Ally, "good good good"});
  v = role_valences(lex, m);
  CHECK(v.allies == doctest::Approx(24.0 / 4.0));
}

TEST_CASE("lexicon lookups are case-insensitive") {
  const std::vector<std::pair<std::string, double>> rows{{"Good", 7.47}, {"bad", 2.63}};
  const ValenceLexicon lex = ValenceLexicon::from_entries(rows);
  CHECK(lex.size() == 2);
  CHECK(lex.lookup("GOOD") == 7.47);
  CHECK(lex.lookup("good") == 7.47);
  CHECK_FALSE(lex.lookup("ugly"));
  CHECK(lex.min_score() == 2.63);
  CHECK(lex.max_score() == 7.47);
  for (const auto& [w, s] : builtin_lexicon().entries()) {
    CHECK(s >= kMinValence);
    CHECK(s <= kMaxValence);
  }
  CHECK(builtin_lexicon().size() == 50);
}

TEST_CASE("lexicon file formats") {
  {
    std::istringstream in("good,7.47\nbad,2.63\n");
    CHECK(read_lexicon(in).size() == 2);
  }
  const ValenceLexicon tsv = load_lexicon(data_path("lexicon_basic.tsv"));
  CHECK(tsv.size() == 4);
  CHECK(tsv.lookup("happy") == 8.2);
  CHECK(tsv.lookup("don't") == 3.0);
  CHECK(tsv.lookup("caf\xc3\xa9") == 6.4);
  const ValenceLexicon csv = load_lexicon(data_path("lexicon_basic.csv"));
  CHECK(csv.size() == 2);
  CHECK(csv.lookup("bad") == 2.9);

  std::ostringstream out;
  write_lexicon(out, tsv);
  std::istringstream back(out.str());
  CHECK(read_lexicon(back) == tsv);
}

TEST_CASE("lexicon errors") {
  auto line_of = [](const std::string& file) -> std::size_t {
    try {
      load_lexicon(data_path(file));
    } catch (const LexiconError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("lexicon_out_of_range.csv") == 3);
  CHECK(line_of("lexicon_duplicate.csv") == 3);
  CHECK(line_of("lexicon_malformed.csv") == 2);
  CHECK_THROWS_AS(load_lexicon(data_path("missing.csv")), LexiconError);

  const std::vector<std::pair<std::string, double>> low{{"meh", 0.5}};
  CHECK_THROWS_AS(ValenceLexicon::from_entries(low), LexiconError);
  const std::vector<std::pair<std::string, double>> dup{{"a", 5.0}, {"A", 6.0}};
  CHECK_THROWS_AS(ValenceLexicon::from_entries(dup), LexiconError);
  std::istringstream in("good,7.5,extra\n");
  CHECK_THROWS_AS(read_lexicon(in), LexiconError);
}
