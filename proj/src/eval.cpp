#include "tribunal/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "tribunal/rng.hpp"

namespace tribunal {

namespace {

using nlohmann::json;

std::uint64_t matrix_digest(const FeatureMatrix& m) {
  std::uint64_t h = fnv1a(m.schema_version);
  h = fnv1a(std::string_view(reinterpret_cast<const char*>(m.values.data()), m.values.size() * sizeof(double)), h);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const char tag[3] = {static_cast<char>(m.labels[i]), static_cast<char>(m.agreements[i]),
                         static_cast<char>(m.regions[i])};
    h = fnv1a(std::string_view(tag, 3), h);
  }
  return h;
}

std::vector<std::size_t> filter_rows(const FeatureMatrix& m, std::span<const std::size_t> rows, const Selector& s) {
  std::vector<std::size_t> out;
  for (std::size_t r : rows)
    if (s.matches(m.agreements[r], m.regions[r])) out.push_back(r);
  return out;
}

void require_both_labels(std::span<const std::uint8_t> labels, std::span<const std::size_t> rows, Task task,
                         const std::string& where) {
  if (rows.empty()) throw ExperimentError(where + " is empty");
  std::size_t positives = 0;
  for (std::size_t r : rows) positives += labels[r];
  const std::string pos(positive_label_name(task));
  if (positives == 0) throw ExperimentError(where + " has no " + pos + " cases");
  if (positives == rows.size()) throw ExperimentError(where + " has only " + pos + " cases");
}

MatrixView view_of(const FeatureMatrix& m, const std::vector<std::uint8_t>& labels) {
  return MatrixView{m.values, m.cols(), labels};
}

}  // namespace

std::string_view to_string(Task t) {
  switch (t) {
    case Task::Decision: return "decision";
    case Task::OmPardon: return "om_pardon";
    case Task::OmPunish: return "om_punish";
  }
  return "?";
}

std::optional<Task> parse_task(std::string_view s) {
  for (Task t : {Task::Decision, Task::OmPardon, Task::OmPunish})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

std::string_view positive_label_name(Task t) {
  switch (t) {
    case Task::Decision: return "punish";
    case Task::OmPardon: return "overwhelming-majority pardon";
    case Task::OmPunish: return "overwhelming-majority punish";
  }
  return "?";
}

bool task_positive(Task t, Decision d, AgreementLevel a) {
  switch (t) {
    case Task::Decision: return d == Decision::Punish;
    case Task::OmPardon: return d == Decision::Pardon && a == AgreementLevel::OverwhelmingMajority;
    case Task::OmPunish: return d == Decision::Punish && a == AgreementLevel::OverwhelmingMajority;
  }
  return false;
}

std::vector<std::uint8_t> task_labels(const FeatureMatrix& m, Task t) {
  std::vector<std::uint8_t> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = task_positive(t, m.labels[i], m.agreements[i]) ? 1 : 0;
  return out;
}

RocResult roc_auc(std::span<const ScoredLabel> scored) {
  std::size_t positives = 0;
  for (const ScoredLabel& s : scored) {
    if (std::isnan(s.score)) throw ContractError("roc_auc: NaN score");
    positives += s.positive ? 1 : 0;
  }
  const std::size_t negatives = scored.size() - positives;
  if (positives == 0 || negatives == 0) throw ContractError("roc_auc: both labels must be present");

  std::vector<ScoredLabel> sorted(scored.begin(), scored.end());
  std::sort(sorted.begin(), sorted.end(), [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });

  RocResult result;
  auto& points = result.curve.points;
  points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  const double p = static_cast<double>(positives), n = static_cast<double>(negatives);
  std::size_t tp = 0, fp = 0;
  double area = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double score = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == score; ++i) (sorted[i].positive ? tp : fp) += 1;
    const RocPoint next{static_cast<double>(fp) / n, static_cast<double>(tp) / p, score};
    area += (next.fpr - points.back().fpr) * (next.tpr + points.back().tpr) / 2.0;
    points.push_back(next);
  }
  points.back().fpr = 1.0;
  points.back().tpr = 1.0;
  result.auc = area;
  return result;
}

bool Selector::matches(AgreementLevel a, Region r) const {
  return (!agreement || *agreement == a) && (!region || *region == r);
}

std::string Selector::to_string() const {
  std::string out;
  if (agreement) out += "agreement=" + std::string(tribunal::to_string(*agreement));
  if (region) out += (out.empty() ? "" : "&") + std::string("region=") + std::string(tribunal::to_string(*region));
  return out.empty() ? "all" : out;
}

json EvalConfig::to_json() const {
  return {{"forest", forest.to_json()}, {"test_fraction", test_fraction}, {"split_seed", split_seed}};
}

TrainTestSplit stratified_split(std::span<const std::uint8_t> labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ContractError("stratified_split: test_fraction not in (0,1)");
  TrainTestSplit split;
  for (std::uint8_t label : {std::uint8_t{0}, std::uint8_t{1}}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) idx.push_back(i);
    Rng rng(derive_seed(seed, label));
    rng.shuffle(std::span<std::size_t>(idx));
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(idx.size()) * test_fraction));
    split.test.insert(split.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

json ExperimentReport::to_json(bool include_curve) const {
  json j = {{"task", tribunal::to_string(task)},
            {"model", tribunal::to_string(model)},
            {"train_selector", train_selector.to_string()},
            {"test_selector", test_selector.to_string()},
            {"auc", auc},
            {"auc_4dp", format_auc(auc)},
            {"n_features", n_features},
            {"n_train", n_train},
            {"n_test", n_test},
            {"config", config},
            {"fingerprint", fingerprint}};
  if (include_curve) {
    json pts = json::array();
    for (const RocPoint& p : curve.points)
      pts.push_back({p.fpr, p.tpr, std::isfinite(p.threshold) ? json(p.threshold) : json(nullptr)});
    j["curve"] = std::move(pts);
  }
  return j;
}

ExperimentReport evaluate(const FeatureMatrix& train, const FeatureMatrix& test, Task task, ModelKind model,
                          const EvalConfig& config, Selector train_selector, Selector test_selector) {
  const FeatureMatrix train_m = model == ModelKind::Full ? train : train.select_model(model);
  const FeatureMatrix test_m = model == ModelKind::Full ? test : test.select_model(model);
  const auto train_labels = task_labels(train_m, task);
  const auto test_labels = task_labels(test_m, task);

  const RandomForest forest = fit_forest(view_of(train_m, train_labels), train_m.names, config.forest,
                                         train_m.schema_version, config.threads);
  const auto scores = predict_all(forest, view_of(test_m, test_labels), config.threads);
  std::vector<ScoredLabel> scored(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) scored[i] = {scores[i], test_labels[i] != 0};
  RocResult roc = roc_auc(scored);

  ExperimentReport r;
  r.task = task;
  r.model = model;
  r.train_selector = std::move(train_selector);
  r.test_selector = std::move(test_selector);
  r.auc = roc.auc;
  r.curve = std::move(roc.curve);
  r.n_features = train_m.cols();
  r.n_train = train_m.rows();
  r.n_test = test_m.rows();
  r.config = {{"task", tribunal::to_string(task)},
              {"model", tribunal::to_string(model)},
              {"train_selector", r.train_selector.to_string()},
              {"test_selector", r.test_selector.to_string()},
              {"eval", config.to_json()},
              {"train_digest", hex64(matrix_digest(train_m))},
              {"test_digest", hex64(matrix_digest(test_m))}};
  r.fingerprint = hex64(fnv1a(r.config.dump()));
  return r;
}

std::vector<ExperimentReport> run_agreement_grid(const FeatureMatrix& full, const EvalConfig& config, Task task) {
  const auto labels = task_labels(full, task);
  const TrainTestSplit split = stratified_split(labels, config.test_fraction, config.split_seed);

  std::vector<std::vector<std::size_t>> train_rows, test_rows;
  for (AgreementLevel a : kAllAgreementLevels) {
    const Selector s{a, std::nullopt};
    train_rows.push_back(filter_rows(full, split.train, s));
    test_rows.push_back(filter_rows(full, split.test, s));
    require_both_labels(labels, train_rows.back(), task, "agreement grid train stratum " + s.to_string());
    require_both_labels(labels, test_rows.back(), task, "agreement grid test stratum " + s.to_string());
  }

  std::vector<ExperimentReport> reports;
  for (std::size_t ti = 0; ti < kAllAgreementLevels.size(); ++ti) {
    const FeatureMatrix train = full.select_rows(train_rows[ti]);
    const auto train_labels = task_labels(train, task);
    const RandomForest forest =
        fit_forest(view_of(train, train_labels), train.names, config.forest, train.schema_version, config.threads);
    for (std::size_t si = 0; si < kAllAgreementLevels.size(); ++si) {
      const FeatureMatrix test = full.select_rows(test_rows[si]);
      const auto test_labels = task_labels(test, task);
      const auto scores = predict_all(forest, view_of(test, test_labels), config.threads);
      std::vector<ScoredLabel> scored(scores.size());
      for (std::size_t i = 0; i < scores.size(); ++i) scored[i] = {scores[i], test_labels[i] != 0};
      RocResult roc = roc_auc(scored);

      ExperimentReport r;
      r.task = task;
      r.model = ModelKind::Full;
      r.train_selector = Selector{kAllAgreementLevels[ti], std::nullopt};
      r.test_selector = Selector{kAllAgreementLevels[si], std::nullopt};
      r.auc = roc.auc;
      r.curve = std::move(roc.curve);
      r.n_features = train.cols();
      r.n_train = train.rows();
      r.n_test = test.rows();
      r.config = {{"experiment", "agreement_grid"},
                  {"task", tribunal::to_string(task)},
                  {"model", "full"},
                  {"train_selector", r.train_selector.to_string()},
                  {"test_selector", r.test_selector.to_string()},
                  {"eval", config.to_json()},
                  {"corpus_digest", hex64(matrix_digest(full))}};
      r.fingerprint = hex64(fnv1a(r.config.dump()));
      reports.push_back(std::move(r));
    }
  }
  return reports;
}

std::vector<ExperimentReport> run_agreement_grid(std::span<const Case> cases, const ValenceLexicon& lexicon,
                                                 const EvalConfig& config, Task task) {
  return run_agreement_grid(extract_matrix(cases, lexicon, ModelKind::Full), config, task);
}

std::vector<ExperimentReport> run_model_comparison(const FeatureMatrix& full, Task task, const EvalConfig& config) {
  const auto labels = task_labels(full, task);
  const TrainTestSplit split = stratified_split(labels, config.test_fraction, config.split_seed);
  require_both_labels(labels, split.train, task, "model comparison train split");
  require_both_labels(labels, split.test, task, "model comparison test split");
  const FeatureMatrix train = full.select_rows(split.train);
  const FeatureMatrix test = full.select_rows(split.test);

  std::vector<ExperimentReport> reports;
  for (ModelKind model : {ModelKind::Performance, ModelKind::Report, ModelKind::Chat, ModelKind::Full}) {
    ExperimentReport r = evaluate(train, test, task, model, config);
    r.config["experiment"] = "model_comparison";
    r.config["corpus_digest"] = hex64(matrix_digest(full));
    r.fingerprint = hex64(fnv1a(r.config.dump()));
    reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<ExperimentReport> run_model_comparison(std::span<const Case> cases, const ValenceLexicon& lexicon,
                                                   Task task, const EvalConfig& config) {
  return run_model_comparison(extract_matrix(cases, lexicon, ModelKind::Full), task, config);
}

ExperimentReport run_portability(const FeatureMatrix& train, const FeatureMatrix& test, Task task, ModelKind model,
                                 bool zero_test_chat, const EvalConfig& config) {
  if (train.schema_version != test.schema_version || train.names != test.names)
    throw ExperimentError("portability: train and test feature schemas differ (" + train.schema_version + " vs " +
                          test.schema_version + ")");
  if (train.cols() != kFullFeatures) throw ExperimentError("portability: full-schema matrices required");
  const auto train_labels = task_labels(train, task);
  const auto test_labels = task_labels(test, task);
  std::vector<std::size_t> all_train(train.rows()), all_test(test.rows());
  for (std::size_t i = 0; i < all_train.size(); ++i) all_train[i] = i;
  for (std::size_t i = 0; i < all_test.size(); ++i) all_test[i] = i;
  require_both_labels(train_labels, all_train, task, "portability training corpus");
  require_both_labels(test_labels, all_test, task, "portability test corpus");

  FeatureMatrix test_copy = test;
  if (zero_test_chat) test_copy.zero_family(FeatureFamily::Chat);

  auto region_selector = [](const FeatureMatrix& m) {
    Selector s;
    if (m.rows() > 0 && std::all_of(m.regions.begin(), m.regions.end(), [&](Region r) { return r == m.regions[0]; }))
      s.region = m.regions[0];
    return s;
  };
  ExperimentReport r = evaluate(train, test_copy, task, model, config, region_selector(train), region_selector(test));
  r.config["experiment"] = "portability";
  r.config["zero_test_chat"] = zero_test_chat;
  r.fingerprint = hex64(fnv1a(r.config.dump()));
  return r;
}

ExperimentReport run_portability(std::span<const Case> train, std::span<const Case> test,
                                 const ValenceLexicon& lexicon, Task task, ModelKind model, bool zero_test_chat,
                                 const EvalConfig& config) {
  return run_portability(extract_matrix(train, lexicon, ModelKind::Full), extract_matrix(test, lexicon, ModelKind::Full),
                         task, model, zero_test_chat, config);
}

std::string format_auc(double auc) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.4f", auc);
  return buf;
}

void write_reports_csv(std::ostream& out, std::span<const ExperimentReport> reports) {
  out << "task,model,train_sel,test_sel,auc\n";
  for (const ExperimentReport& r : reports)
    out << to_string(r.task) << ',' << to_string(r.model) << ',' << r.train_selector.to_string() << ','
        << r.test_selector.to_string() << ',' << format_auc(r.auc) << '\n';
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "fpr,tpr,threshold\n";
  char buf[96];
  for (const RocPoint& p : curve.points) {
    if (std::isfinite(p.threshold))
      std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", p.fpr, p.tpr, p.threshold);
    else
      std::snprintf(buf, sizeof buf, "%.9g,%.9g,inf\n", p.fpr, p.tpr);
    out << buf;
  }
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash) {
  for (unsigned char ch : bytes) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace tribunal
