#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance runner. Written without reusing library internals.

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tribunal/eval.hpp"
#include "tribunal/forest.hpp"
#include "tribunal/valence.hpp"

namespace oracles {

using namespace tribunal;

// Independent scorer: split by hand, count each lexicon word, weighted mean.
inline double brute_force_score(const std::map<std::string, double>& lex, const std::string& text) {
  std::map<std::string, int> counts;
  std::string word;
  auto flush = [&] {
    std::size_t a = 0, b = word.size();
    while (a < b && word[a] == '\'') ++a;
    while (b > a && word[b - 1] == '\'') --b;
    std::string w = word.substr(a, b - a);
    for (char& ch : w)
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    if (lex.count(w)) ++counts[w];
    word.clear();
  };
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (u >= 0x80 || std::isalnum(u) || ch == '\'')
      word += ch;
    else
      flush();
  }
  flush();
  double num = 0.0, den = 0.0;
  for (const auto& [w, n] : counts) {
    num += lex.at(w) * n;
    den += n;
  }
  return den == 0.0 ? 0.0 : num / den;
}

inline std::string random_text(std::mt19937_64& rng, const std::vector<std::string>& words) {
  static const std::vector<std::string> noise{"xyz", "qq", "mid", "pls", "it's", "42", "caf\xc3\xa9", "'"};
  static const std::vector<std::string> seps{" ", "  ", ", ", "!", "...", "?", "\t", " - ", "\n"};
  std::uniform_int_distribution<int> len(0, 14);
  std::string out;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    std::string w = rng() % 3 == 0 ? noise[rng() % noise.size()] : words[rng() % words.size()];
    if (rng() % 4 == 0)
      for (char& ch : w) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    out += w;
    out += seps[rng() % seps.size()];
  }
  return out;
}

inline const ValenceLexicon& fixture_lexicon() {
  static const ValenceLexicon lex = [] {
    const std::vector<std::pair<std::string, double>> rows{
        {"stupid", 2}, {"noob", 3}, {"team", 6},   {"gg", 7},    {"sorry", 4}, {"bad", 3},  {"lol", 8},
        {"nice", 7},   {"ward", 5}, {"please", 6}, {"lag", 3},   {"ez", 5},    {"win", 8},  {"report", 3}};
    return ValenceLexicon::from_entries(rows);
  }();
  return lex;
}

inline double mean(std::initializer_list<double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Expected values worked out by hand from the fixture's raw numbers.
inline std::map<std::string, double> fixture_oracle() {
  std::map<std::string, double> e;
  const std::string va = "verbal.abuse.", inf = "intentionally.feeding.";

  // Match A: two ally verbal-abuse reports.
  e[va + "offender.kills"] = 2;
  e[va + "offender.deaths"] = 8;
  e[va + "offender.assists"] = 3;
  e[va + "offender.kda"] = 5.0 / 9.0;
  e[va + "offender.damage.dealt"] = 9000;
  e[va + "offender.damage.received"] = 21000;
  e[va + "offender.gold"] = 7200;
  e[va + "offender.gpm"] = 7200.0 / 30.0;
  e[va + "offender.time.played"] = 1800;
  e[va + "allies.kills.avg.per.player"] = 18.0 / 4;
  e[va + "allies.deaths.avg.per.player"] = 14.0 / 4;
  e[va + "allies.assists.avg.per.player"] = 26.0 / 4;
  e[va + "allies.kda"] = 44.0 / 15.0;
  e[va + "allies.kda.avg.per.player"] = mean({12.0 / 4, 10.0 / 5, 15.0 / 3, 7.0 / 6});
  e[va + "allies.damage.dealt.avg.per.player"] = 55000.0 / 4;
  e[va + "allies.damage.received.avg.per.player"] = 59000.0 / 4;
  e[va + "allies.gpm"] = 40500.0 / 4 / 30;
  e[va + "enemies.kills.avg.per.player"] = 30.0 / 5;
  e[va + "enemies.deaths.avg.per.player"] = 17.0 / 5;
  e[va + "enemies.assists.avg.per.player"] = 35.0 / 5;
  e[va + "enemies.kda"] = 65.0 / 18.0;
  e[va + "enemies.kda.avg.per.player"] = mean({13.0 / 3, 13.0 / 4, 13.0 / 5, 13.0 / 4, 13.0 / 6});
  e[va + "enemies.damage.dealt.avg.per.player"] = 78000.0 / 5;
  e[va + "enemies.damage.received.avg.per.player"] = 76000.0 / 5;
  e[va + "enemies.gpm"] = 57000.0 / 5 / 30;
  e[va + "match.count"] = 1;
  e[va + "loss.rate"] = 1;
  e[va + "allied.report.count"] = 2;
  e[va + "allied.report.comment.count"] = 1;
  e[va + "offender.valence"] = (2 + 3 + 6 + 7) / 4.0;
  e[va + "victim.valence"] = (4 + 3 + 5 + 6) / 4.0;  // allies reported, so allies are the victims
  e[va + "bystander.valence"] = (8 + 7) / 2.0;
  e[va + "offender.chat.msgs"] = 2;
  e[va + "total.chat.msgs"] = 5;

  // Match B: two enemy feeding reports beat one ally verbal-abuse report.
  e[inf + "offender.kills"] = 1;
  e[inf + "offender.deaths"] = 12;
  e[inf + "offender.assists"] = 2;
  e[inf + "offender.kda"] = 3.0 / 13.0;
  e[inf + "offender.damage.dealt"] = 6000;
  e[inf + "offender.damage.received"] = 30000;
  e[inf + "offender.gold"] = 6000;
  e[inf + "offender.gpm"] = 6000.0 / 40.0;
  e[inf + "offender.time.played"] = 2400;
  e[inf + "allies.kills.avg.per.player"] = 14.0 / 4;
  e[inf + "allies.deaths.avg.per.player"] = 22.0 / 4;
  e[inf + "allies.assists.avg.per.player"] = 23.0 / 4;
  e[inf + "allies.kda"] = 37.0 / 23.0;
  e[inf + "allies.kda.avg.per.player"] = mean({8.0 / 7, 6.0 / 8, 12.0 / 6, 11.0 / 5});
  e[inf + "allies.damage.dealt.avg.per.player"] = 52000.0 / 4;
  e[inf + "allies.damage.received.avg.per.player"] = 76000.0 / 4;
  e[inf + "allies.gpm"] = 45500.0 / 4 / 40;
  e[inf + "enemies.kills.avg.per.player"] = 36.0 / 5;
  e[inf + "enemies.deaths.avg.per.player"] = 12.0 / 5;
  e[inf + "enemies.assists.avg.per.player"] = 44.0 / 5;
  e[inf + "enemies.kda"] = 80.0 / 13.0;
  e[inf + "enemies.kda.avg.per.player"] = mean({16.0 / 2, 17.0 / 3, 16.0 / 4, 15.0 / 3, 16.0 / 5});
  e[inf + "enemies.damage.dealt.avg.per.player"] = 98000.0 / 5;
  e[inf + "enemies.damage.received.avg.per.player"] = 65000.0 / 5;
  e[inf + "enemies.gpm"] = 73000.0 / 5 / 40;
  e[inf + "match.count"] = 1;
  e[inf + "loss.rate"] = 0;
  e[inf + "allied.report.count"] = 1;
  e[inf + "enemy.report.count"] = 2;
  e[inf + "enemy.report.comment.count"] = 1;
  e[inf + "offender.valence"] = (4 + 3) / 2.0;
  e[inf + "victim.valence"] = 3;  // not a chat offense: allies are the victims
  e[inf + "bystander.valence"] = (5 + 8) / 2.0;
  e[inf + "offender.chat.msgs"] = 1;
  e[inf + "total.chat.msgs"] = 3;

  e["case.offender.valence"] = 25.0 / 6.0;
  e["case.all.valence"] = 74.0 / 15.0;
  e["case.offender.msg.count"] = 3;
  e["case.total.msg.count"] = 8;
  return e;
}

struct Dataset {
  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  std::size_t cols = 0;
  std::vector<std::string> names;

  MatrixView view() const { return {values, cols, labels}; }
};

inline Dataset random_dataset(std::mt19937_64& rng, std::size_t rows, std::size_t cols, int distinct) {
  Dataset d;
  d.cols = cols;
  std::uniform_int_distribution<int> v(0, distinct - 1);
  for (std::size_t i = 0; i < rows * cols; ++i) d.values.push_back(v(rng) * 0.5);
  for (std::size_t i = 0; i < rows; ++i) d.labels.push_back(static_cast<std::uint8_t>(rng() % 2));
  for (std::size_t j = 0; j < cols; ++j) d.names.push_back("f" + std::to_string(j));
  return d;
}

// Signal on column 0, noise elsewhere.
inline Dataset planted_dataset(std::uint64_t seed, std::size_t rows, std::size_t cols) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset d;
  d.cols = cols;
  for (std::size_t i = 0; i < rows; ++i) {
    const bool y = rng() % 2;
    d.labels.push_back(y);
    for (std::size_t j = 0; j < cols; ++j) d.values.push_back(noise(rng) + (j == 0 && y ? 1.5 : 0.0));
  }
  for (std::size_t j = 0; j < cols; ++j) d.names.push_back("f" + std::to_string(j));
  return d;
}

inline double gini_oracle(double pos, double n) {
  const double p = pos / n;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

// Every feature, every gap between consecutive distinct values.
inline std::optional<Split> brute_force_split(const MatrixView& data, const std::vector<std::size_t>& rows,
                                       const std::vector<std::size_t>& features, std::size_t min_leaf) {
  double n = 0, pos = 0;
  for (std::size_t r : rows) {
    n += 1;
    pos += data.labels[r];
  }
  const double parent = gini_oracle(pos, n);
  std::optional<Split> best;
  std::vector<std::size_t> fs = features;
  std::sort(fs.begin(), fs.end());
  for (std::size_t f : fs) {
    std::vector<double> vals;
    for (std::size_t r : rows) vals.push_back(data.at(r, f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
      const double t = (vals[k] + vals[k + 1]) / 2.0;
      double ln = 0, lp = 0;
      for (std::size_t r : rows)
        if (data.at(r, f) <= t) {
          ln += 1;
          lp += data.labels[r];
        }
      const double rn = n - ln, rp = pos - lp;
      if (ln < static_cast<double>(min_leaf) || rn < static_cast<double>(min_leaf)) continue;
      const double dec = parent - (ln * gini_oracle(lp, ln) + rn * gini_oracle(rp, rn)) / n;
      if (!best || dec > best->impurity_decrease + kSplitTolerance) best = Split{f, t, dec};
    }
  }
  if (best && best->impurity_decrease > kSplitTolerance) return best;
  return std::nullopt;
}

// Probability that a random positive outscores a random negative, ties count half.
inline double pairwise_auc(const std::vector<ScoredLabel>& s) {
  double wins = 0.0, pairs = 0.0;
  for (const auto& a : s)
    for (const auto& b : s)
      if (a.positive && !b.positive) {
        pairs += 1.0;
        wins += a.score > b.score ? 1.0 : a.score == b.score ? 0.5 : 0.0;
      }
  return wins / pairs;
}

inline std::vector<ScoredLabel> random_scores(std::mt19937_64& rng, std::size_t n) {
  std::vector<ScoredLabel> s;
  const int levels = 2 + static_cast<int>(rng() % 40);  // few levels means many ties
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = rng() % 2;
    s.push_back({static_cast<double>(rng() % levels) / levels + (pos ? 0.1 : 0.0), pos});
  }
  s[0].positive = true;
  s[1].positive = false;
  return s;
}

}  // namespace oracles
