#pragma once

// CART classification trees, a bagged random forest over them, and
// entropy-based feature ranking.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tribunal/domain.hpp"
#include "tribunal/features.hpp"

namespace tribunal {

struct TrainConfig {
  std::size_t n_trees = 200;
  std::optional<std::size_t> max_depth;           // unlimited when empty
  std::size_t min_leaf = 5;
  std::optional<std::size_t> features_per_split;  // ceil(sqrt(d)) when empty
  bool bootstrap = true;
  std::uint64_t rng_seed = 1;

  std::size_t resolved_features_per_split(std::size_t d) const;
  /// Throws ContractError when a field is out of range for d features.
  void validate(std::size_t d) const;

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  bool operator==(const TrainConfig&) const = default;
};

/// Non-owning row-major matrix with binary labels (1 = positive class).
struct MatrixView {
  std::span<const double> values;
  std::size_t cols = 0;
  std::span<const std::uint8_t> labels;

  std::size_t rows() const { return labels.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return values.subspan(r * cols, cols); }
};

/// Gini impurity of a labeled multiset: 1 - p^2 - (1 - p)^2 with p the punish fraction.
/// Throws ContractError on empty input.
double gini_impurity(std::span<const Decision> labels);
double gini_from_counts(double positive, double total);

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity_decrease = 0.0;

  bool operator==(const Split&) const = default;
};

/// Decreases within this margin count as ties and as "no decrease".
inline constexpr double kSplitTolerance = 1e-12;

/// Best Gini split of `rows` (duplicates allowed, they act as weights) over
/// the candidate `features`. Thresholds are midpoints between consecutive
/// distinct values; rows with value <= threshold go left. Both children must
/// hold at least min_leaf rows. Ties go to the lower feature index, then the
/// lower threshold. Empty when nothing decreases impurity.
std::optional<Split> best_split(const MatrixView& data, std::span<const std::size_t> rows,
                                std::span<const std::size_t> features, std::size_t min_leaf);

struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;

  std::int32_t feature = kLeaf;
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double punish_fraction = 0.0;  // training fraction of positives reaching the node
  double sample_count = 0.0;

  bool is_leaf() const { return feature == kLeaf; }
  bool operator==(const TreeNode&) const = default;
};

/// Flat node array; node 0 is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  std::size_t depth() const;
  bool operator==(const DecisionTree&) const = default;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  std::string schema_version;
  std::vector<std::string> feature_names;
  TrainConfig config;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t n_features() const { return feature_names.size(); }
  bool operator==(const RandomForest&) const = default;
};

/// Grows one CART tree on `rows` of `data`. Each node samples
/// features_per_split candidate features from `rng`.
DecisionTree fit_tree(const MatrixView& data, std::span<const std::size_t> rows, const TrainConfig& config,
                      std::uint64_t seed);

/// Trees draw from independent seeded substreams, so the result does not
/// depend on `threads`. Rows are resampled in a canonical (lexicographic
/// by feature values, then label) order, which makes the forest invariant to
/// the order of training rows. Throws ContractError on a single-class set.
RandomForest fit_forest(const MatrixView& data, std::span<const std::string> feature_names,
                        const TrainConfig& config, std::string schema_version = std::string(kFeatureSchemaVersion),
                        unsigned threads = 1);

/// Mean over trees of the reached leaf's punish fraction.
double predict_proba(const RandomForest& forest, std::span<const double> x);
std::vector<double> predict_all(const RandomForest& forest, const MatrixView& data, unsigned threads = 1);

nlohmann::json forest_to_json(const RandomForest& forest);
/// When `expected` is given, its version and names must match the model's.
RandomForest forest_from_json(const nlohmann::json& j, const FeatureSchema* expected = nullptr);

struct FeatureGain {
  std::string name;
  std::size_t index = 0;
  double gain = 0.0;
};

double entropy_bits(double positive, double total);

/// Bin index per row under equal-frequency binning. Cut points sit at the
/// values of ranks floor(k * n / bins), k = 1..bins-1, with duplicates
/// collapsed; a value's bin is the number of cut points <= it.
std::vector<std::size_t> equal_frequency_bins(std::span<const double> values, std::size_t bins);

/// Information gain in bits of each column after equal-frequency binning,
/// sorted by descending gain, ties by column index.
std::vector<FeatureGain> rank_features_information_gain(const MatrixView& data,
                                                        std::span<const std::string> feature_names,
                                                        std::size_t bins = 10);

}  // namespace tribunal
