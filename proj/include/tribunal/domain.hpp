#pragma once

// Case data model and the JSON Lines corpus format.
//
// A case bundles the 1-5 reported matches of one accused player together with
// the crowd's verdict (decision) and how strongly reviewers agreed on it.
// Enumerations serialize as lowercase snake_case strings.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace tribunal {

enum class Region { NA, EUW, KR };
enum class Decision { Punish, Pardon };
enum class AgreementLevel { Majority, StrongMajority, OverwhelmingMajority };

// Order matters: most_common_report_type breaks ties by this order.
enum class ReportCategory {
  AssistingEnemyTeam,
  IntentionalFeeding,
  OffensiveLanguage,
  VerbalAbuse,
  NegativeAttitude,
  InappropriateName,
  Spamming,
};

enum class PlayerRole { Offender, Ally, Enemy };
enum class ReportSource { Ally, Enemy };

inline constexpr std::array<Region, 3> kAllRegions{Region::NA, Region::EUW, Region::KR};
inline constexpr std::array<AgreementLevel, 3> kAllAgreementLevels{
    AgreementLevel::Majority, AgreementLevel::StrongMajority, AgreementLevel::OverwhelmingMajority};
inline constexpr std::array<ReportCategory, 7> kAllReportCategories{
    ReportCategory::AssistingEnemyTeam, ReportCategory::IntentionalFeeding, ReportCategory::OffensiveLanguage,
    ReportCategory::VerbalAbuse,        ReportCategory::NegativeAttitude,   ReportCategory::InappropriateName,
    ReportCategory::Spamming};
inline constexpr std::size_t kNumReportCategories = kAllReportCategories.size();

inline constexpr std::size_t kMaxMatchesPerCase = 5;
inline constexpr std::size_t kPlayersPerMatch = 10;
inline constexpr std::size_t kAlliesPerMatch = 4;
inline constexpr std::size_t kEnemiesPerMatch = 5;
inline constexpr std::size_t kMaxCommentLength = 500;

std::string_view to_string(Region r);
std::string_view to_string(Decision d);
std::string_view to_string(AgreementLevel a);
std::string_view to_string(ReportCategory c);
std::string_view to_string(PlayerRole r);
std::string_view to_string(ReportSource s);

std::optional<Region> parse_region(std::string_view s);
std::optional<Decision> parse_decision(std::string_view s);
std::optional<AgreementLevel> parse_agreement(std::string_view s);
std::optional<ReportCategory> parse_report_category(std::string_view s);
std::optional<PlayerRole> parse_player_role(std::string_view s);
std::optional<ReportSource> parse_report_source(std::string_view s);

/// Dotted name used in feature names, e.g. "verbal.abuse".
std::string_view feature_prefix(ReportCategory c);

/// Verbal abuse, offensive language and negative attitude.
bool is_communication_category(ReportCategory c);

inline std::size_t index_of(ReportCategory c) { return static_cast<std::size_t>(c); }

struct PlayerStats {
  PlayerRole role = PlayerRole::Ally;
  std::int64_t kills = 0;
  std::int64_t deaths = 0;
  std::int64_t assists = 0;
  double damage_dealt = 0.0;
  double damage_received = 0.0;
  double gold_earned = 0.0;
  double time_played = 0.0;  // seconds

  bool operator==(const PlayerStats&) const = default;
};

struct Report {
  ReportSource source = ReportSource::Ally;
  ReportCategory category = ReportCategory::VerbalAbuse;
  std::optional<std::string> comment;

  bool operator==(const Report&) const = default;
};

struct ChatMessage {
  PlayerRole speaker_role = PlayerRole::Offender;
  std::string text;

  bool operator==(const ChatMessage&) const = default;
};

struct Match {
  double duration = 0.0;  // seconds
  bool offender_won = false;
  std::vector<PlayerStats> players;
  std::vector<Report> reports;
  std::vector<ChatMessage> chat;

  bool operator==(const Match&) const = default;
};

struct Case {
  std::string case_id;
  Region region = Region::NA;
  Decision decision = Decision::Pardon;
  AgreementLevel agreement = AgreementLevel::Majority;
  std::vector<Match> matches;

  bool operator==(const Case&) const = default;
};

/// Thrown when a JSON document does not fit the case schema. `field` is a
/// dotted path such as "matches[0].players[3].role".
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string field, const std::string& what);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Error loading a corpus file. line() is 1-based, 0 when not line-specific.
class DatasetError : public std::runtime_error {
 public:
  DatasetError(std::size_t line, std::string field, const std::string& what);
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

Case case_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Case& c);

/// Canonical single-line form: sorted keys, shortest round-trip floats.
std::string serialize_case(const Case& c);
/// Throws SchemaError, including for text that is not JSON.
Case parse_case(std::string_view line);

struct Violation {
  std::string type;   // e.g. "Case", "Match", "PlayerStats"
  std::string field;  // e.g. "matches"
  std::string rule;   // e.g. "count 6 > 5"
  std::string location;  // path to the offending object, empty for the case itself

  /// "Case.matches: count 6 > 5", prefixed by location when present.
  std::string to_string() const;
};

/// Empty result means the case satisfies every invariant.
std::vector<Violation> validate_case(const Case& c);

std::vector<Case> read_dataset(std::istream& in);
std::vector<Case> load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, std::span<const Case> cases);
void save_dataset(const std::filesystem::path& path, std::span<const Case> cases);

struct RegionTally {
  std::uint64_t cases = 0;
  std::uint64_t matches = 0;
  std::uint64_t reports = 0;

  bool operator==(const RegionTally&) const = default;
  RegionTally& operator+=(const RegionTally& o) {
    cases += o.cases;
    matches += o.matches;
    reports += o.reports;
    return *this;
  }
};

struct DatasetSummary {
  std::array<RegionTally, 3> by_region{};  // indexed by Region

  const RegionTally& region(Region r) const { return by_region[static_cast<std::size_t>(r)]; }
  RegionTally total() const;

  bool operator==(const DatasetSummary&) const = default;
  DatasetSummary& operator+=(const DatasetSummary& o);
};

DatasetSummary summarize_dataset(std::span<const Case> cases);

/// Rows Cases/Matches/Reports, columns EUW NA KR Total.
std::string format_summary_table(const DatasetSummary& s);
nlohmann::json summary_to_json(const DatasetSummary& s);

}  // namespace tribunal
