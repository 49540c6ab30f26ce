#include "tribunal/valence.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace tribunal {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& ch : out) {
    const auto u = static_cast<unsigned char>(ch);
    if (u < 0x80) ch = static_cast<char>(std::tolower(u));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool is_word_byte(unsigned char ch) { return ch >= 0x80 || std::isalnum(ch) || ch == '\''; }

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Scores are invented for testing; they are not ANEW values.
constexpr std::pair<std::string_view, double> kBuiltinEntries[] = {
    {"awesome", 8.1},  {"bad", 2.9},     {"best", 7.9},    {"boring", 3.1},  {"calm", 6.6},
    {"carry", 6.2},    {"cheat", 2.4},   {"cool", 7.1},    {"cry", 2.6},     {"dead", 1.9},
    {"die", 2.0},      {"dumb", 2.5},    {"enjoy", 7.6},   {"fail", 2.3},    {"fair", 6.4},
    {"friend", 7.7},   {"fun", 8.0},     {"gg", 6.3},      {"glad", 7.4},    {"good", 7.5},
    {"great", 7.8},    {"happy", 8.2},   {"hate", 1.8},    {"help", 6.0},    {"hope", 7.2},
    {"idiot", 2.1},    {"kill", 3.3},    {"kind", 7.3},    {"lol", 6.5},     {"lose", 2.7},
    {"loser", 2.2},    {"love", 8.5},    {"mad", 3.0},     {"nice", 7.0},    {"noob", 3.2},
    {"play", 6.8},     {"rage", 2.8},    {"sad", 2.5},     {"sorry", 4.4},   {"stupid", 2.0},
    {"team", 6.1},     {"terrible", 1.9}, {"thanks", 7.3}, {"trash", 2.2},   {"ugly", 2.6},
    {"useless", 2.1},  {"ward", 5.2},    {"well", 6.4},    {"win", 7.9},     {"worst", 1.7},
};

}  // namespace

LexiconError::LexiconError(std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? "lexicon line " + std::to_string(line) + ": " + what : "lexicon: " + what),
      line_(line) {}

ValenceLexicon ValenceLexicon::from_entries(std::span<const std::pair<std::string, double>> entries) {
  ValenceLexicon lex;
  for (const auto& [word, score] : entries) {
    const std::string key = lowercase(word);
    if (key.empty()) throw LexiconError(0, "empty word");
    if (!(score >= kMinValence && score <= kMaxValence))
      throw LexiconError(0, "valence " + std::to_string(score) + " for \"" + key + "\" outside [1, 9]");
    if (!lex.scores_.emplace(key, score).second) throw LexiconError(0, "duplicate word \"" + key + "\"");
  }
  return lex;
}

const std::pair<const std::string, double>* ValenceLexicon::find(std::string_view word) const {
  auto it = scores_.find(word);
  if (it == scores_.end()) {
    const std::string lower = lowercase(word);
    if (lower == word) return nullptr;
    it = scores_.find(lower);
    if (it == scores_.end()) return nullptr;
  }
  return &*it;
}

std::optional<double> ValenceLexicon::lookup(std::string_view word) const {
  if (const auto* entry = find(word)) return entry->second;
  return std::nullopt;
}

double ValenceLexicon::min_score() const {
  double m = kMaxValence;
  for (const auto& [_, s] : scores_) m = std::min(m, s);
  return m;
}

double ValenceLexicon::max_score() const {
  double m = kMinValence;
  for (const auto& [_, s] : scores_) m = std::max(m, s);
  return m;
}

ValenceLexicon read_lexicon(std::istream& in) {
  ValenceLexicon lex;
  std::vector<std::pair<std::string, double>> rows;
  std::vector<std::size_t> row_lines;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto delim = text.find_first_of("\t,");
    if (delim == std::string_view::npos) throw LexiconError(line_no, "expected two columns");
    const std::string_view word = trim(text.substr(0, delim));
    const std::string_view score_text = trim(text.substr(delim + 1));
    if (score_text.find_first_of("\t,") != std::string_view::npos)
      throw LexiconError(line_no, "expected two columns");
    const auto score = parse_double(score_text);
    if (!score) {
      if (!seen_data && lowercase(word) == "word") {
        seen_data = true;
        continue;
      }
      throw LexiconError(line_no, "malformed valence \"" + std::string(score_text) + "\"");
    }
    seen_data = true;
    if (word.empty()) throw LexiconError(line_no, "empty word");
    if (!(*score >= kMinValence && *score <= kMaxValence))
      throw LexiconError(line_no, "valence " + std::string(score_text) + " outside [1, 9]");
    rows.emplace_back(std::string(word), *score);
    row_lines.push_back(line_no);
  }
  // Re-check duplicates here so the error carries the offending line.
  std::map<std::string, std::size_t, std::less<>> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string key = lowercase(rows[i].first);
    if (auto [it, inserted] = seen.emplace(key, row_lines[i]); !inserted)
      throw LexiconError(row_lines[i], "duplicate word \"" + key + "\" (first on line " +
                                           std::to_string(it->second) + ")");
  }
  return ValenceLexicon::from_entries(rows);
}

ValenceLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LexiconError(0, "cannot open " + path.string());
  return read_lexicon(in);
}

void write_lexicon(std::ostream& out, const ValenceLexicon& lexicon) {
  out << "word,valence\n";
  char buf[32];
  for (const auto& [word, score] : lexicon.entries()) {
    std::snprintf(buf, sizeof buf, "%.17g", score);
    out << word << ',' << buf << '\n';
  }
}

const ValenceLexicon& builtin_lexicon() {
  static const ValenceLexicon lex = [] {
    std::vector<std::pair<std::string, double>> rows;
    for (const auto& [w, s] : kBuiltinEntries) rows.emplace_back(std::string(w), s);
    return ValenceLexicon::from_entries(rows);
  }();
  return lex;
}

TokenizedText tokenize(std::string_view text) {
  TokenizedText tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view word = text.substr(i, j - i);
    while (!word.empty() && word.front() == '\'') word.remove_prefix(1);
    while (!word.empty() && word.back() == '\'') word.remove_suffix(1);
    if (!word.empty()) tokens.push_back(lowercase(word));
    i = j;
  }
  return tokens;
}

void ValenceAccumulator::add_token(std::string_view token) {
  if (const auto* entry = lexicon_->find(token)) {
    ++counts_[entry];
    ++matched_;
  }
}

void ValenceAccumulator::add_text(std::string_view text) {
  for (const std::string& token : tokenize(text)) add_token(token);
}

void ValenceAccumulator::merge(const ValenceAccumulator& other) {
  for (const auto& [entry, n] : other.counts_) counts_[entry] += n;
  matched_ += other.matched_;
}

double ValenceAccumulator::value() const {
  if (matched_ == 0) return 0.0;
  double sum = 0.0;
  for (const auto& [entry, n] : counts_) sum += entry->second * static_cast<double>(n);
  return sum / static_cast<double>(matched_);
}

double score_tokens(const ValenceLexicon& lexicon, std::span<const std::string> tokens) {
  ValenceAccumulator acc(lexicon);
  for (const std::string& token : tokens) acc.add_token(token);
  return acc.value();
}

double score_text(const ValenceLexicon& lexicon, std::string_view text) {
  ValenceAccumulator acc(lexicon);
  acc.add_text(text);
  return acc.value();
}

RoleValences role_valences(const ValenceLexicon& lexicon, const Match& match) {
  ValenceAccumulator offender(lexicon), allies(lexicon), enemies(lexicon);
  for (const ChatMessage& msg : match.chat) {
    switch (msg.speaker_role) {
      case PlayerRole::Offender: offender.add_text(msg.text); break;
      case PlayerRole::Ally: allies.add_text(msg.text); break;
      case PlayerRole::Enemy: enemies.add_text(msg.text); break;
    }
  }
  ValenceAccumulator all(lexicon);
  all.merge(offender);
  all.merge(allies);
  all.merge(enemies);
  return {offender.value(), allies.value(), enemies.value(), all.value()};
}

}  // namespace tribunal
