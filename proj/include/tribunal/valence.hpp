#pragma once

// Lexicon-based valence scoring of chat text.
//
// The valence of a text is the frequency-weighted mean lexicon score of the
// tokens that appear in the lexicon, and 0 when none of them do.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tribunal/domain.hpp"

namespace tribunal {

inline constexpr double kMinValence = 1.0;
inline constexpr double kMaxValence = 9.0;

class LexiconError : public std::runtime_error {
 public:
  LexiconError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValenceLexicon {
 public:
  ValenceLexicon() = default;

  /// Words are lowercased; throws LexiconError on out-of-range scores or
  /// duplicates after normalization.
  static ValenceLexicon from_entries(std::span<const std::pair<std::string, double>> entries);

  /// Case-insensitive.
  std::optional<double> lookup(std::string_view word) const;
  /// Stored (word, score) entry, or nullptr. The pointer stays valid for the lexicon's lifetime.
  const std::pair<const std::string, double>* find(std::string_view word) const;

  std::size_t size() const { return scores_.size(); }
  bool empty() const { return scores_.empty(); }
  const std::map<std::string, double, std::less<>>& entries() const { return scores_; }
  double min_score() const;
  double max_score() const;

  bool operator==(const ValenceLexicon&) const = default;

 private:
  std::map<std::string, double, std::less<>> scores_;
};

/// Two columns (word, valence), tab- or comma-delimited. Optional
/// `word,valence` header; blank lines and lines starting with '#' are skipped.
ValenceLexicon read_lexicon(std::istream& in);
ValenceLexicon load_lexicon(const std::filesystem::path& path);
void write_lexicon(std::ostream& out, const ValenceLexicon& lexicon);

/// Small lexicon with invented in-range scores, used by tests and as the
/// default when no lexicon file is supplied.
const ValenceLexicon& builtin_lexicon();

using TokenizedText = std::vector<std::string>;

/// ASCII-lowercases and splits on every byte that is not alphanumeric or an
/// apostrophe. Bytes >= 0x80 count as word characters so multi-byte UTF-8
/// words stay whole. Leading and trailing apostrophes are trimmed, so only
/// intra-word apostrophes survive.
TokenizedText tokenize(std::string_view text);

/// Per-word frequency counts over any number of texts. The score is summed in
/// word order, so it does not depend on the order texts were added.
class ValenceAccumulator {
 public:
  explicit ValenceAccumulator(const ValenceLexicon& lexicon) : lexicon_(&lexicon) {}

  void add_text(std::string_view text);
  void add_token(std::string_view token);
  void merge(const ValenceAccumulator& other);

  std::size_t matched() const { return matched_; }
  double value() const;

 private:
  using Entry = std::pair<const std::string, double>;
  struct ByWord {
    bool operator()(const Entry* a, const Entry* b) const { return a->first < b->first; }
  };

  const ValenceLexicon* lexicon_;
  std::map<const Entry*, std::size_t, ByWord> counts_;
  std::size_t matched_ = 0;
};

double score_tokens(const ValenceLexicon& lexicon, std::span<const std::string> tokens);
double score_text(const ValenceLexicon& lexicon, std::string_view text);

struct RoleValences {
  double offender = 0.0;
  double allies = 0.0;
  double enemies = 0.0;
  double all = 0.0;
};

/// Each role scores the concatenation of its messages; a silent role scores 0.
RoleValences role_valences(const ValenceLexicon& lexicon, const Match& match);

}  // namespace tribunal
