#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tribunal/forest.hpp"
#include "tribunal/synth.hpp"

using namespace tribunal;
using namespace oracles;

namespace {

TrainConfig small_config(std::size_t trees = 15) {
  TrainConfig c;
  c.n_trees = trees;
  c.min_leaf = 2;
  c.rng_seed = 99;
  return c;
}

}  // namespace

TEST_CASE("gini impurity") {
  using D = Decision;
  const std::vector<Decision> half{D::Punish, D::Pardon, D::Punish, D::Pardon};
  CHECK(gini_impurity(half) == 0.5);
  const std::vector<Decision> pure{D::Pardon, D::Pardon};
  CHECK(gini_impurity(pure) == 0.0);
  const std::vector<Decision> skew{D::Punish, D::Pardon, D::Pardon};
  CHECK(gini_impurity(skew) == doctest::Approx(4.0 / 9.0));
  CHECK_THROWS_AS(gini_impurity(std::span<const Decision>{}), ContractError);
  for (int pos = 0; pos <= 20; ++pos) {
    const double g = gini_from_counts(pos, 20);
    CHECK(g >= 0.0);
    CHECK(g <= 0.5);
  }
}

TEST_CASE("best_split matches exhaustive search") {
  std::mt19937_64 rng(31337);
  int with_split = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t rows = 2 + rng() % 49;
    const std::size_t cols = 1 + rng() % 6;
    const Dataset d = random_dataset(rng, rows, cols, 2 + static_cast<int>(rng() % 8));
    // Sample with replacement so duplicate rows act as weights.
    std::vector<std::size_t> sample;
    for (std::size_t i = 0; i < rows; ++i) sample.push_back(rng() % rows);
    std::vector<std::size_t> features;
    for (std::size_t j = 0; j < cols; ++j)
      if (rng() % 3 != 0) features.push_back(j);
    if (features.empty()) features.push_back(0);
    const std::size_t min_leaf = 1 + rng() % 4;
    const auto got = best_split(d.view(), sample, features, min_leaf);
    const auto want = brute_force_split(d.view(), sample, features, min_leaf);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      ++with_split;
      CHECK(got->feature == want->feature);
      CHECK(got->threshold == want->threshold);
      CHECK(got->impurity_decrease == doctest::Approx(want->impurity_decrease).epsilon(1e-12));
    }
  }
  CHECK(with_split > 30);
}

TEST_CASE("best_split edge cases") {
  Dataset d;
  d.cols = 2;
  d.values = {1, 5, 2, 5, 3, 5, 4, 5};
  d.labels = {0, 0, 1, 1};
  const std::vector<std::size_t> rows{0, 1, 2, 3};
  const std::vector<std::size_t> only_constant{1};
  CHECK_FALSE(best_split(d.view(), rows, only_constant, 1));
  const std::vector<std::size_t> both{0, 1};
  const auto s = best_split(d.view(), rows, both, 1);
  REQUIRE(s);
  CHECK(s->feature == 0);
  CHECK(s->threshold == 2.5);
  CHECK(s->impurity_decrease == 0.5);
  // min_leaf 3 leaves no legal cut among 4 rows.
  CHECK_FALSE(best_split(d.view(), rows, both, 3));
  // A pure node cannot improve.
  d.labels = {1, 1, 1, 1};
  CHECK_FALSE(best_split(d.view(), rows, both, 1));
}

TEST_CASE("hand-built tree walk") {
  DecisionTree t;
  t.nodes = {
      {0, 2.0, 1, 2, 0.5, 10}, {TreeNode::kLeaf, 0, 0, 0, 0.1, 4}, {1, -1.0, 3, 4, 0.8, 6},
      {TreeNode::kLeaf, 0, 0, 0, 0.25, 2}, {TreeNode::kLeaf, 0, 0, 0, 1.0, 4},
  };
  const std::vector<double> a{2.0, 0.0}, b{2.5, -3.0}, c{9.0, 7.0};
  CHECK(t.predict(a) == 0.1);  // equal to the threshold goes left
  CHECK(t.predict(b) == 0.25);
  CHECK(t.predict(c) == 1.0);
  CHECK(t.depth() == 2);
}

TEST_CASE("single tree on separable data") {
  Dataset d;
  d.cols = 1;
  d.values = {1, 2, 3, 10, 11, 12};
  d.labels = {0, 0, 0, 1, 1, 1};
  TrainConfig c;
  c.min_leaf = 1;
  const std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5};
  const DecisionTree t = fit_tree(d.view(), rows, c, 1);
  REQUIRE(t.nodes.size() == 3);
  CHECK(t.nodes[0].feature == 0);
  CHECK(t.nodes[0].threshold == 6.5);
  CHECK(t.nodes[t.nodes[0].left].punish_fraction == 0.0);
  CHECK(t.nodes[t.nodes[0].right].punish_fraction == 1.0);
  CHECK(t.nodes[0].sample_count == 6);
}

TEST_CASE("max_depth and min_leaf limit growth") {
  const Dataset d = planted_dataset(5, 300, 4);
  std::vector<std::size_t> rows(300);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  TrainConfig c;
  c.max_depth = 3;
  c.min_leaf = 1;
  CHECK(fit_tree(d.view(), rows, c, 7).depth() <= 3);
  c.max_depth.reset();
  c.min_leaf = 40;
  const DecisionTree t = fit_tree(d.view(), rows, c, 7);
  for (const TreeNode& n : t.nodes)
    if (n.is_leaf()) CHECK(n.sample_count >= 40);
}

TEST_CASE("fit is reproducible, thread-independent and row-order independent") {
  const Dataset d = planted_dataset(17, 400, 12);
  const TrainConfig c = small_config(20);
  const RandomForest a = fit_forest(d.view(), d.names, c);
  const RandomForest b = fit_forest(d.view(), d.names, c);
  CHECK(a == b);
  CHECK(fit_forest(d.view(), d.names, c, std::string(kFeatureSchemaVersion), 4) == a);

  std::vector<std::size_t> perm(400);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(3);
  std::shuffle(perm.begin(), perm.end(), rng);
  Dataset shuffled;
  shuffled.cols = d.cols;
  shuffled.names = d.names;
  for (std::size_t r : perm) {
    shuffled.labels.push_back(d.labels[r]);
    for (std::size_t j = 0; j < d.cols; ++j) shuffled.values.push_back(d.values[r * d.cols + j]);
  }
  CHECK(fit_forest(shuffled.view(), shuffled.names, c) == a);

  TrainConfig other = c;
  other.rng_seed = 100;
  CHECK_FALSE(fit_forest(d.view(), d.names, other) == a);

  for (const DecisionTree& t : a.trees)
    for (const TreeNode& n : t.nodes)
      if (!n.is_leaf()) CHECK(static_cast<std::size_t>(n.feature) < d.cols);
}

TEST_CASE("probabilities are in range and average over trees") {
  const Dataset d = planted_dataset(23, 300, 6);
  RandomForest f = fit_forest(d.view(), d.names, small_config(10));
  const auto before = predict_all(f, d.view());
  CHECK(predict_all(f, d.view(), 3) == before);
  for (double p : before) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
  DecisionTree constant;
  constant.nodes = {TreeNode{TreeNode::kLeaf, 0, 0, 0, 0.3, 1}};
  f.trees.push_back(constant);
  const auto after = predict_all(f, d.view());
  for (std::size_t i = 0; i < before.size(); ++i)
    CHECK(after[i] == doctest::Approx((10.0 * before[i] + 0.3) / 11.0).epsilon(1e-12));
  const std::vector<double> short_row{1.0};
  CHECK_THROWS_AS(predict_proba(f, short_row), ContractError);
}

TEST_CASE("strictly monotone transforms keep predictions") {
  const Dataset d = planted_dataset(41, 250, 5);
  Dataset t = d;
  for (double& v : t.values) v = std::exp(v) * 3.0 + 1.0;
  // Midpoint thresholds only map onto each other for values the split saw, so
  // grow on every row and compare on those rows.
  TrainConfig c = small_config(8);
  c.bootstrap = false;
  const RandomForest fa = fit_forest(d.view(), d.names, c);
  const RandomForest fb = fit_forest(t.view(), t.names, c);
  REQUIRE(fa.trees.size() == fb.trees.size());
  for (std::size_t k = 0; k < fa.trees.size(); ++k) {
    REQUIRE(fa.trees[k].nodes.size() == fb.trees[k].nodes.size());
    for (std::size_t i = 0; i < fa.trees[k].nodes.size(); ++i)
      CHECK(fa.trees[k].nodes[i].feature == fb.trees[k].nodes[i].feature);
  }
  CHECK(predict_all(fa, d.view()) == predict_all(fb, t.view()));
}

TEST_CASE("model JSON round trip") {
  const Dataset d = planted_dataset(2, 200, 7);
  RandomForest f = fit_forest(d.view(), d.names, small_config(6));
  f.metadata = {{"task", "decision"}};
  const RandomForest back = forest_from_json(nlohmann::json::parse(forest_to_json(f).dump()));
  CHECK(back == f);
  CHECK(predict_all(back, d.view()) == predict_all(f, d.view()));

  FeatureSchema wrong;
  wrong.version = std::string(kFeatureSchemaVersion);
  wrong.names = {"a", "b"};
  CHECK_THROWS_AS(forest_from_json(forest_to_json(f), &wrong), SchemaError);
  auto j = forest_to_json(f);
  j["schema_version"] = "other/9";
  FeatureSchema same;
  same.version = std::string(kFeatureSchemaVersion);
  same.names = d.names;
  CHECK_NOTHROW(forest_from_json(forest_to_json(f), &same));
  CHECK_THROWS_AS(forest_from_json(j, &same), SchemaError);
  j = forest_to_json(f);
  j["trees"][0]["feature"] = 99;
  if (j["trees"][0].contains("left")) CHECK_THROWS_AS(forest_from_json(j), SchemaError);
  CHECK_THROWS_AS(forest_from_json(nlohmann::json::object()), SchemaError);
}

TEST_CASE("training config contracts") {
  TrainConfig c;
  CHECK(c.resolved_features_per_split(452) == 22);
  c.features_per_split = 5;
  CHECK_THROWS_AS(c.validate(4), ContractError);
  c = TrainConfig{};
  c.n_trees = 0;
  CHECK_THROWS_AS(c.validate(4), ContractError);
  c = TrainConfig{};
  c.max_depth = 4;
  CHECK(TrainConfig::from_json(c.to_json()) == c);

  Dataset one;
  one.cols = 1;
  one.values = {1, 2, 3};
  one.labels = {1, 1, 1};
  one.names = {"x"};
  CHECK_THROWS_AS(fit_forest(one.view(), one.names, TrainConfig{}), ContractError);
}

TEST_CASE("information gain ranking") {
  CHECK(entropy_bits(5, 10) == 1.0);
  CHECK(entropy_bits(0, 10) == 0.0);

  const std::vector<double> vals{5, 1, 3, 2, 4, 6, 8, 7, 9, 10};
  const auto bins = equal_frequency_bins(vals, 5);
  CHECK(bins == std::vector<std::size_t>{2, 0, 1, 0, 1, 2, 3, 3, 4, 4});  // cuts 3, 5, 7, 9
  const std::vector<double> flat(10, 3.0);
  const auto flat_bins = equal_frequency_bins(flat, 10);
  CHECK(std::count(flat_bins.begin(), flat_bins.end(), flat_bins.front()) == 10);

  Dataset d;
  d.cols = 3;
  d.names = {"noise", "constant", "label_copy"};
  std::mt19937_64 rng(5);
  for (int i = 0; i < 60; ++i) {
    const std::uint8_t y = i % 3 == 0;
    d.labels.push_back(y);
    d.values.insert(d.values.end(), {static_cast<double>(rng() % 7), 4.0, static_cast<double>(y)});
  }
  const double h = entropy_bits(20, 60);
  const auto ranked = rank_features_information_gain(d.view(), d.names, 10);
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].name == "label_copy");
  CHECK(ranked[0].gain == doctest::Approx(h).epsilon(1e-12));
  CHECK(ranked.back().name == "constant");
  CHECK(ranked.back().gain == 0.0);
  for (const auto& g : ranked) {
    CHECK(g.gain >= 0.0);
    CHECK(g.gain <= h + 1e-12);
  }
}

TEST_CASE("planted generator signal ranks first") {
  GeneratorConfig cfg;
  cfg.n_cases = 1000;
  const SyntheticCorpus corpus = generate_dataset(cfg, builtin_lexicon());
  const FeatureMatrix m = extract_matrix(corpus.cases, builtin_lexicon(), ModelKind::Full);
  std::vector<std::uint8_t> y;
  for (Decision dec : m.labels) y.push_back(dec == Decision::Punish);
  const auto ranked = rank_features_information_gain({m.values, m.cols(), y}, m.names, 10);
  CHECK(ranked.front().name == corpus.dominant_feature());
}
