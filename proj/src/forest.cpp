#include "tribunal/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "tribunal/rng.hpp"

namespace tribunal {

namespace {

using nlohmann::json;

struct WeightedRow {
  std::size_t row = 0;
  double weight = 0.0;
};

struct Candidate {
  double value;
  double weight;
  double positive;
};

// Collapses duplicate row indices into weights.
std::vector<WeightedRow> to_weighted(std::span<const std::size_t> rows) {
  std::vector<std::size_t> sorted(rows.begin(), rows.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<WeightedRow> out;
  for (std::size_t r : sorted) {
    if (!out.empty() && out.back().row == r)
      out.back().weight += 1.0;
    else
      out.push_back({r, 1.0});
  }
  return out;
}

double split_threshold(double lo, double hi) {
  const double mid = std::midpoint(lo, hi);
  return mid < hi ? mid : lo;
}

// `features` must be ascending so that the first best candidate wins ties.
std::optional<Split> best_weighted_split(const MatrixView& data, std::span<const WeightedRow> rows,
                                         std::span<const std::size_t> features, double min_leaf,
                                         std::vector<Candidate>& scratch) {
  double total = 0.0, positive = 0.0;
  for (const WeightedRow& r : rows) {
    total += r.weight;
    if (data.labels[r.row]) positive += r.weight;
  }
  if (total < 2.0 * min_leaf) return std::nullopt;
  const double parent = gini_from_counts(positive, total);
  if (parent <= 0.0) return std::nullopt;

  std::optional<Split> best;
  for (std::size_t f : features) {
    scratch.clear();
    for (const WeightedRow& r : rows)
      scratch.push_back({data.at(r.row, f), r.weight, data.labels[r.row] ? r.weight : 0.0});
    std::sort(scratch.begin(), scratch.end(), [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
    if (scratch.front().value == scratch.back().value) continue;

    double left_w = 0.0, left_p = 0.0;
    for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
      left_w += scratch[i].weight;
      left_p += scratch[i].positive;
      if (scratch[i].value == scratch[i + 1].value) continue;
      const double right_w = total - left_w;
      if (right_w < min_leaf) break;
      if (left_w < min_leaf) continue;
      const double children =
          (left_w * gini_from_counts(left_p, left_w) + right_w * gini_from_counts(positive - left_p, right_w)) / total;
      const double decrease = parent - children;
      if (!best || decrease > best->impurity_decrease + kSplitTolerance)
        best = Split{f, split_threshold(scratch[i].value, scratch[i + 1].value), decrease};
    }
  }
  if (best && best->impurity_decrease > kSplitTolerance) return best;
  return std::nullopt;
}

class TreeGrower {
 public:
  TreeGrower(const MatrixView& data, const TrainConfig& config, std::uint64_t seed)
      : data_(data),
        config_(config),
        rng_(seed),
        features_per_split_(config.resolved_features_per_split(data.cols)),
        feature_pool_(data.cols) {
    std::iota(feature_pool_.begin(), feature_pool_.end(), std::size_t{0});
  }

  DecisionTree grow(std::vector<WeightedRow> rows) {
    rows_ = std::move(rows);
    tree_.nodes.clear();
    build(0, rows_.size(), 0);
    return std::move(tree_);
  }

 private:
  std::uint32_t build(std::size_t begin, std::size_t end, std::size_t depth) {
    const auto id = static_cast<std::uint32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const std::span<const WeightedRow> rows(rows_.data() + begin, end - begin);

    double total = 0.0, positive = 0.0;
    for (const WeightedRow& r : rows) {
      total += r.weight;
      if (data_.labels[r.row]) positive += r.weight;
    }
    tree_.nodes[id].sample_count = total;
    tree_.nodes[id].punish_fraction = total > 0.0 ? positive / total : 0.0;

    const bool depth_left = !config_.max_depth || depth < *config_.max_depth;
    if (!depth_left || positive == 0.0 || positive == total ||
        total < 2.0 * static_cast<double>(config_.min_leaf))
      return id;

    const auto candidates = sample_features();
    const auto split =
        best_weighted_split(data_, rows, candidates, static_cast<double>(config_.min_leaf), scratch_);
    if (!split) return id;

    const auto mid = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                    rows_.begin() + static_cast<std::ptrdiff_t>(end), [&](const WeightedRow& r) {
                                      return data_.at(r.row, split->feature) <= split->threshold;
                                    });
    const auto split_at = static_cast<std::size_t>(mid - rows_.begin());

    tree_.nodes[id].feature = static_cast<std::int32_t>(split->feature);
    tree_.nodes[id].threshold = split->threshold;
    const std::uint32_t left = build(begin, split_at, depth + 1);
    const std::uint32_t right = build(split_at, end, depth + 1);
    tree_.nodes[id].left = left;
    tree_.nodes[id].right = right;
    return id;
  }

  // Partial Fisher-Yates over a persistent pool, returned ascending.
  std::vector<std::size_t> sample_features() {
    const std::size_t d = feature_pool_.size();
    for (std::size_t i = 0; i < features_per_split_; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_.below(d - i));
      std::swap(feature_pool_[i], feature_pool_[j]);
    }
    std::vector<std::size_t> out(feature_pool_.begin(),
                                 feature_pool_.begin() + static_cast<std::ptrdiff_t>(features_per_split_));
    std::sort(out.begin(), out.end());
    return out;
  }

  const MatrixView& data_;
  const TrainConfig& config_;
  Rng rng_;
  std::size_t features_per_split_;
  std::vector<std::size_t> feature_pool_;
  std::vector<WeightedRow> rows_;
  std::vector<Candidate> scratch_;
  DecisionTree tree_;
};

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

json node_to_json(const DecisionTree& tree, std::uint32_t id) {
  const TreeNode& n = tree.nodes[id];
  if (n.is_leaf()) return {{"punish_fraction", n.punish_fraction}, {"samples", n.sample_count}};
  return {{"feature", n.feature},
          {"threshold", n.threshold},
          {"punish_fraction", n.punish_fraction},
          {"samples", n.sample_count},
          {"left", node_to_json(tree, n.left)},
          {"right", node_to_json(tree, n.right)}};
}

std::uint32_t node_from_json(const json& j, DecisionTree& tree, std::size_t n_features) {
  const auto id = static_cast<std::uint32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  TreeNode node;
  node.punish_fraction = j.at("punish_fraction").get<double>();
  node.sample_count = j.at("samples").get<double>();
  if (j.contains("feature")) {
    node.feature = j.at("feature").get<std::int32_t>();
    if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= n_features)
      throw SchemaError("trees.feature", "index " + std::to_string(node.feature) + " out of range");
    node.threshold = j.at("threshold").get<double>();
    node.left = node_from_json(j.at("left"), tree, n_features);
    node.right = node_from_json(j.at("right"), tree, n_features);
  }
  tree.nodes[id] = node;
  return id;
}

}  // namespace

std::size_t TrainConfig::resolved_features_per_split(std::size_t d) const {
  if (features_per_split) return *features_per_split;
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
}

void TrainConfig::validate(std::size_t d) const {
  if (n_trees < 1) throw ContractError("TrainConfig: n_trees must be >= 1");
  if (min_leaf < 1) throw ContractError("TrainConfig: min_leaf must be >= 1");
  if (d == 0) throw ContractError("TrainConfig: no features");
  const std::size_t k = resolved_features_per_split(d);
  if (k < 1 || k > d)
    throw ContractError("TrainConfig: features_per_split " + std::to_string(k) + " not in [1, " + std::to_string(d) +
                        "]");
}

json TrainConfig::to_json() const {
  return {{"n_trees", n_trees},
          {"max_depth", max_depth ? json(*max_depth) : json(nullptr)},
          {"min_leaf", min_leaf},
          {"features_per_split", features_per_split ? json(*features_per_split) : json(nullptr)},
          {"bootstrap", bootstrap},
          {"rng_seed", rng_seed}};
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig c;
  if (j.contains("n_trees")) c.n_trees = j.at("n_trees").get<std::size_t>();
  if (j.contains("max_depth") && !j.at("max_depth").is_null()) c.max_depth = j.at("max_depth").get<std::size_t>();
  if (j.contains("min_leaf")) c.min_leaf = j.at("min_leaf").get<std::size_t>();
  if (j.contains("features_per_split") && !j.at("features_per_split").is_null())
    c.features_per_split = j.at("features_per_split").get<std::size_t>();
  if (j.contains("bootstrap")) c.bootstrap = j.at("bootstrap").get<bool>();
  if (j.contains("rng_seed")) c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  return c;
}

double gini_from_counts(double positive, double total) {
  if (total <= 0.0) return 0.0;
  const double p = positive / total;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

double gini_impurity(std::span<const Decision> labels) {
  if (labels.empty()) throw ContractError("gini_impurity: empty label multiset");
  const auto punish = std::count(labels.begin(), labels.end(), Decision::Punish);
  return gini_from_counts(static_cast<double>(punish), static_cast<double>(labels.size()));
}

std::optional<Split> best_split(const MatrixView& data, std::span<const std::size_t> rows,
                                std::span<const std::size_t> features, std::size_t min_leaf) {
  if (rows.empty()) return std::nullopt;
  std::vector<std::size_t> sorted_features(features.begin(), features.end());
  std::sort(sorted_features.begin(), sorted_features.end());
  sorted_features.erase(std::unique(sorted_features.begin(), sorted_features.end()), sorted_features.end());
  const auto weighted = to_weighted(rows);
  std::vector<Candidate> scratch;
  return best_weighted_split(data, weighted, sorted_features, static_cast<double>(std::max<std::size_t>(min_leaf, 1)),
                             scratch);
}

double DecisionTree::predict(std::span<const double> x) const {
  std::uint32_t id = 0;
  while (!nodes[id].is_leaf()) {
    const TreeNode& n = nodes[id];
    id = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[id].punish_fraction;
}

std::size_t DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    const auto [id, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[id].is_leaf()) {
      stack.push_back({nodes[id].left, d + 1});
      stack.push_back({nodes[id].right, d + 1});
    }
  }
  return deepest;
}

DecisionTree fit_tree(const MatrixView& data, std::span<const std::size_t> rows, const TrainConfig& config,
                      std::uint64_t seed) {
  config.validate(data.cols);
  TreeGrower grower(data, config, seed);
  return grower.grow(to_weighted(rows));
}

RandomForest fit_forest(const MatrixView& data, std::span<const std::string> feature_names, const TrainConfig& config,
                        std::string schema_version, unsigned threads) {
  if (data.rows() < 2) throw ContractError("fit_forest: need at least 2 training rows");
  if (feature_names.size() != data.cols) throw ContractError("fit_forest: feature name count does not match columns");
  config.validate(data.cols);
  const auto positives = std::count(data.labels.begin(), data.labels.end(), std::uint8_t{1});
  if (positives == 0 || static_cast<std::size_t>(positives) == data.rows())
    throw ContractError(
        "fit_forest: training set has a single class; select rows containing both positive and negative labels");

  // Canonical resampling order: lexicographic by (feature values, label).
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = data.row(a), rb = data.row(b);
    const auto cmp = std::lexicographical_compare_three_way(ra.begin(), ra.end(), rb.begin(), rb.end(),
                                                            [](double x, double y) { return std::weak_order(x, y); });
    if (cmp != 0) return cmp < 0;
    return data.labels[a] < data.labels[b];
  });

  RandomForest forest;
  forest.schema_version = std::move(schema_version);
  forest.feature_names.assign(feature_names.begin(), feature_names.end());
  forest.config = config;
  forest.trees.resize(config.n_trees);
  const std::size_t n = data.rows();
  parallel_for(config.n_trees, threads, [&](std::size_t t) {
    std::vector<std::size_t> sample;
    if (config.bootstrap) {
      Rng resample(derive_seed(config.rng_seed, 2 * t));
      sample.reserve(n);
      for (std::size_t i = 0; i < n; ++i) sample.push_back(order[resample.below(n)]);
    } else {
      sample = order;
    }
    TreeGrower grower(data, config, derive_seed(config.rng_seed, 2 * t + 1));
    forest.trees[t] = grower.grow(to_weighted(sample));
  });
  return forest;
}

double predict_proba(const RandomForest& forest, std::span<const double> x) {
  if (x.size() != forest.n_features())
    throw ContractError("predict_proba: vector has " + std::to_string(x.size()) + " values, model expects " +
                        std::to_string(forest.n_features()));
  if (forest.trees.empty()) throw ContractError("predict_proba: forest has no trees");
  double sum = 0.0;
  for (const DecisionTree& t : forest.trees) sum += t.predict(x);
  return sum / static_cast<double>(forest.trees.size());
}

std::vector<double> predict_all(const RandomForest& forest, const MatrixView& data, unsigned threads) {
  if (data.cols != forest.n_features())
    throw ContractError("predict_all: matrix has " + std::to_string(data.cols) + " columns, model expects " +
                        std::to_string(forest.n_features()));
  std::vector<double> out(data.rows());
  parallel_for(data.rows(), threads, [&](std::size_t i) { out[i] = predict_proba(forest, data.row(i)); });
  return out;
}

json forest_to_json(const RandomForest& forest) {
  json trees = json::array();
  for (const DecisionTree& t : forest.trees) trees.push_back(t.nodes.empty() ? json(nullptr) : node_to_json(t, 0));
  return {{"schema_version", forest.schema_version},
          {"config", forest.config.to_json()},
          {"feature_names", forest.feature_names},
          {"metadata", forest.metadata},
          {"trees", std::move(trees)}};
}

RandomForest forest_from_json(const json& j, const FeatureSchema* expected) {
  RandomForest f;
  try {
    f.schema_version = j.at("schema_version").get<std::string>();
    f.config = TrainConfig::from_json(j.at("config"));
    f.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (j.contains("metadata")) f.metadata = j.at("metadata");
    for (const json& t : j.at("trees")) {
      DecisionTree tree;
      node_from_json(t, tree, f.feature_names.size());
      f.trees.push_back(std::move(tree));
    }
  } catch (const json::exception& e) {
    throw SchemaError("<model>", std::string("malformed model file: ") + e.what());
  }
  if (expected) {
    if (f.schema_version != expected->version)
      throw SchemaError("schema_version",
                        "model built for " + f.schema_version + ", feature manifest is " + expected->version);
    if (f.feature_names != expected->names) throw SchemaError("feature_names", "model features differ from manifest");
  }
  return f;
}

double entropy_bits(double positive, double total) {
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : {positive, total - positive}) {
    if (c <= 0.0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

std::vector<std::size_t> equal_frequency_bins(std::span<const double> values, std::size_t bins) {
  const std::size_t n = values.size();
  std::vector<std::size_t> out(n, 0);
  if (n == 0 || bins < 2) return out;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  for (std::size_t k = 1; k < bins; ++k) cuts.push_back(sorted[k * n / bins]);
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), values[i]) - cuts.begin());
  return out;
}

std::vector<FeatureGain> rank_features_information_gain(const MatrixView& data,
                                                        std::span<const std::string> feature_names,
                                                        std::size_t bins) {
  if (feature_names.size() != data.cols) throw ContractError("rank_features_information_gain: name count mismatch");
  const double n = static_cast<double>(data.rows());
  const double positives = static_cast<double>(std::count(data.labels.begin(), data.labels.end(), std::uint8_t{1}));
  if (positives == 0.0 || positives == n)
    throw ContractError("rank_features_information_gain: both labels must be present");
  const double h = entropy_bits(positives, n);

  std::vector<FeatureGain> out;
  std::vector<double> column(data.rows());
  for (std::size_t j = 0; j < data.cols; ++j) {
    for (std::size_t i = 0; i < data.rows(); ++i) column[i] = data.at(i, j);
    const auto assignment = equal_frequency_bins(column, bins);
    const std::size_t n_bins = assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
    std::vector<double> count(n_bins, 0.0), pos(n_bins, 0.0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
      count[assignment[i]] += 1.0;
      if (data.labels[i]) pos[assignment[i]] += 1.0;
    }
    double conditional = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) conditional += (count[b] / n) * entropy_bits(pos[b], count[b]);
    out.push_back({feature_names[j], j, std::clamp(h - conditional, 0.0, h)});
  }
  std::stable_sort(out.begin(), out.end(), [](const FeatureGain& a, const FeatureGain& b) {
    if (a.gain != b.gain) return a.gain > b.gain;
    return a.index < b.index;
  });
  return out;
}

}  // namespace tribunal
