#pragma once

// Case -> named 452-dimension feature vector.
//
// Every family is computed per report category: the matches of a case are
// grouped by their most common report type and each statistic is averaged
// over the group, with its population standard deviation alongside. A
// category with no matches contributes zeros.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tribunal/domain.hpp"
#include "tribunal/valence.hpp"

namespace tribunal {

enum class FeatureFamily { Performance, Report, Chat };
enum class ModelKind { Performance, Report, Chat, Full };

inline constexpr std::size_t kPerformancePerCategory = 52;
inline constexpr std::size_t kReportPerCategory = 4;
inline constexpr std::size_t kChatPerCategory = 8;
inline constexpr std::size_t kCaseChatFeatures = 4;
inline constexpr std::size_t kPerformanceFeatures = kPerformancePerCategory * kNumReportCategories;  // 364
inline constexpr std::size_t kReportFeatures = kReportPerCategory * kNumReportCategories;            // 28
inline constexpr std::size_t kChatFeatures = kChatPerCategory * kNumReportCategories + kCaseChatFeatures;  // 60
inline constexpr std::size_t kFullFeatures = kPerformanceFeatures + kReportFeatures + kChatFeatures;  // 452

inline constexpr std::string_view kFeatureSchemaVersion = "tribunal-features/1";

std::string_view to_string(FeatureFamily f);
std::string_view to_string(ModelKind m);
std::optional<FeatureFamily> parse_feature_family(std::string_view s);
std::optional<ModelKind> parse_model_kind(std::string_view s);

/// Thrown when an operation is called outside its documented precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct FeatureSchema {
  std::string version;
  std::vector<std::string> names;
  std::vector<FeatureFamily> families;

  std::size_t size() const { return names.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  nlohmann::json to_manifest() const;
  static FeatureSchema from_manifest(const nlohmann::json& j);

  bool operator==(const FeatureSchema&) const = default;
};

/// The full 452-name schema: performance, then report, then chat.
const FeatureSchema& feature_schema();

/// Half-open column range [first, first + count) of a model within the full schema.
struct ColumnRange {
  std::size_t first = 0;
  std::size_t count = 0;
};
ColumnRange model_columns(ModelKind model);
FeatureSchema schema_for(ModelKind model);

/// Highest report count wins; ties go to the category declared first in ReportCategory.
ReportCategory most_common_report_type(const Match& match);

enum class VictimScope { Allies, Enemies, AllPlayers };
std::string_view to_string(VictimScope v);

/// Who the offender's communication offense targeted, judged by who reported
/// it. Throws ContractError unless the match's most common report type is a
/// communication category.
VictimScope victim_scope(const Match& match);

/// (kills + assists) / (deaths + 1)
double kda(std::int64_t kills, std::int64_t deaths, std::int64_t assists);
double gold_per_minute(double gold, double duration_seconds);

std::vector<double> extract_performance_features(const Case& c);
std::vector<double> extract_report_features(const Case& c);
std::vector<double> extract_chat_features(const Case& c, const ValenceLexicon& lexicon);

struct FeatureVector {
  ModelKind model = ModelKind::Full;
  std::vector<double> values;
  Decision label = Decision::Pardon;
  AgreementLevel agreement = AgreementLevel::Majority;
  Region region = Region::NA;
};

FeatureVector extract_feature_vector(const Case& c, const ValenceLexicon& lexicon, ModelKind model);

/// Row-major matrix of feature vectors with their case labels.
struct FeatureMatrix {
  std::string schema_version{kFeatureSchemaVersion};
  std::vector<std::string> names;
  std::vector<FeatureFamily> families;
  std::vector<double> values;
  std::vector<Decision> labels;
  std::vector<AgreementLevel> agreements;
  std::vector<Region> regions;

  std::size_t cols() const { return names.size(); }
  std::size_t rows() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols(), cols()}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols(), cols()}; }

  void append(const FeatureVector& v);
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
  /// Restricts the columns to one model family. Requires a full-schema matrix.
  FeatureMatrix select_model(ModelKind model) const;
  /// Sets every column of the family to 0 (models a region the lexicon cannot read).
  void zero_family(FeatureFamily family);
  FeatureMatrix concat(const FeatureMatrix& other) const;
};

FeatureMatrix empty_matrix(ModelKind model);
FeatureMatrix extract_matrix(std::span<const Case> cases, const ValenceLexicon& lexicon, ModelKind model);

/// Header: feature names then label, agreement, region. Floats with 9 significant digits.
void write_feature_csv(std::ostream& out, const FeatureMatrix& m);
/// Column families are recovered from the full schema; throws SchemaError on
/// unknown names or malformed rows.
FeatureMatrix read_feature_csv(std::istream& in);

}  // namespace tribunal
