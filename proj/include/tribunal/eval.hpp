#pragma once

// ROC/AUC and the experiment harness: agreement grid, per-family model
// comparison and cross-region portability.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tribunal/domain.hpp"
#include "tribunal/features.hpp"
#include "tribunal/forest.hpp"
#include "tribunal/valence.hpp"

namespace tribunal {

/// Decision: punish vs pardon. OmPardon / OmPunish: overwhelming-majority
/// pardon (punish) against every other case, one-vs-rest.
enum class Task { Decision, OmPardon, OmPunish };

std::string_view to_string(Task t);
std::optional<Task> parse_task(std::string_view s);
std::string_view positive_label_name(Task t);

bool task_positive(Task t, Decision d, AgreementLevel a);
std::vector<std::uint8_t> task_labels(const FeatureMatrix& m, Task t);

struct ScoredLabel {
  double score = 0.0;
  bool positive = false;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // scores >= threshold are called positive; +inf at the origin
};

struct RocCurve {
  std::vector<RocPoint> points;
};

struct RocResult {
  RocCurve curve;
  double auc = 0.0;
};

/// One curve point per distinct score, from (0,0) to (1,1); trapezoidal AUC.
/// Throws ContractError unless both labels are present.
RocResult roc_auc(std::span<const ScoredLabel> scored);

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row filter for a train or test population.
struct Selector {
  std::optional<AgreementLevel> agreement;
  std::optional<Region> region;

  bool matches(AgreementLevel a, Region r) const;
  /// "all", "agreement=strong_majority", "region=euw", or both joined by '&'.
  std::string to_string() const;
};

struct EvalConfig {
  TrainConfig forest;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 7;
  unsigned threads = 1;  // does not affect results

  nlohmann::json to_json() const;
};

struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per-label shuffle (seeded), round(n_label * test_fraction) rows of each
/// label go to test. Both index lists are returned ascending.
TrainTestSplit stratified_split(std::span<const std::uint8_t> labels, double test_fraction, std::uint64_t seed);

struct ExperimentReport {
  Task task = Task::Decision;
  ModelKind model = ModelKind::Full;
  Selector train_selector;
  Selector test_selector;
  double auc = 0.0;
  RocCurve curve;
  std::size_t n_features = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  nlohmann::json config;    // everything needed to re-run the cell
  std::string fingerprint;  // FNV-1a of config and input data

  nlohmann::json to_json(bool include_curve = true) const;
};

/// Trains on `train` and scores `test`, both full-schema matrices.
ExperimentReport evaluate(const FeatureMatrix& train, const FeatureMatrix& test, Task task, ModelKind model,
                          const EvalConfig& config, Selector train_selector = {}, Selector test_selector = {});

/// 3 x 3 reports ordered by (train agreement, test agreement).
std::vector<ExperimentReport> run_agreement_grid(const FeatureMatrix& full, const EvalConfig& config,
                                                 Task task = Task::Decision);
std::vector<ExperimentReport> run_agreement_grid(std::span<const Case> cases, const ValenceLexicon& lexicon,
                                                 const EvalConfig& config, Task task = Task::Decision);

/// Reports for Performance, Report, Chat, Full on one shared split.
std::vector<ExperimentReport> run_model_comparison(const FeatureMatrix& full, Task task, const EvalConfig& config);
std::vector<ExperimentReport> run_model_comparison(std::span<const Case> cases, const ValenceLexicon& lexicon,
                                                   Task task, const EvalConfig& config);

/// Trains on all of `train`, evaluates on all of `test`. With
/// zero_test_chat the test chat features are zeroed (a region the lexicon
/// cannot read). Throws ExperimentError when the schemas differ.
ExperimentReport run_portability(const FeatureMatrix& train, const FeatureMatrix& test, Task task, ModelKind model,
                                 bool zero_test_chat, const EvalConfig& config);
ExperimentReport run_portability(std::span<const Case> train, std::span<const Case> test,
                                 const ValenceLexicon& lexicon, Task task, ModelKind model, bool zero_test_chat,
                                 const EvalConfig& config);

/// AUC with 4 decimals.
std::string format_auc(double auc);
/// Header task,model,train_sel,test_sel,auc.
void write_reports_csv(std::ostream& out, std::span<const ExperimentReport> reports);
/// Header fpr,tpr,threshold.
void write_roc_csv(std::ostream& out, const RocCurve& curve);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace tribunal
