// Command-line entry point. Every subcommand accepts --config FILE, a JSON
// object whose keys mirror the long flag names with '-' replaced by '_'
// (generator fields sit under "generator", as in the gen manifest). Flags
// given on the command line win over the file.
//
// Exit status: 0 success, 1 usage error, 2 data or validation error,
// 3 internal invariant failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tribunal/domain.hpp"
#include "tribunal/eval.hpp"
#include "tribunal/features.hpp"
#include "tribunal/forest.hpp"
#include "tribunal/impact.hpp"
#include "tribunal/synth.hpp"
#include "tribunal/valence.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tribunal;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool g_quiet = false;

void log(const std::string& msg) {
  if (!g_quiet) std::cerr << "tribunal: " << msg << '\n';
}

// Collects flag values under their config keys. Keys are JSON pointers so a
// flag can address a nested config field.
class Params {
 public:
  explicit Params(CLI::App* app) : app_(app) {
    app->add_option("--config", config_path_, "JSON config file; flags override its keys");
    app->add_option("--manifest", manifest_path_, "Where to write the run manifest");
  }

  template <class T>
  Params& bind(const std::string& flags, const std::string& key, const std::string& help) {
    auto slot = std::make_shared<std::optional<T>>();
    app_->add_option(flags, *slot, help);
    setters_.push_back([slot, key](json& j) {
      if (*slot) j[json::json_pointer(key)] = **slot;
    });
    return *this;
  }

  Params& flag(const std::string& flags, const std::string& key, const std::string& help) {
    auto slot = std::make_shared<bool>(false);
    app_->add_flag(flags, *slot, help);
    setters_.push_back([slot, key](json& j) {
      if (*slot) j[json::json_pointer(key)] = true;
    });
    return *this;
  }

  json resolve() const {
    json j = json::object();
    if (!config_path_.empty()) {
      std::ifstream in(config_path_);
      if (!in) throw UsageError("cannot read config " + config_path_);
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw UsageError("config " + config_path_ + ": " + e.what());
      }
      if (!j.is_object()) throw UsageError("config " + config_path_ + " must hold a JSON object");
    }
    for (const auto& set : setters_) set(j);
    return j;
  }

  const std::string& manifest_path() const { return manifest_path_; }

 private:
  CLI::App* app_;
  std::string config_path_;
  std::string manifest_path_;
  std::vector<std::function<void(json&)>> setters_;
};

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("parameter ") + key + " has the wrong type");
  }
}

std::string require_str(const json& j, const char* key, const char* flag) {
  const std::string v = get_or<std::string>(j, key, "");
  if (v.empty()) throw UsageError(std::string(flag) + " is required");
  return v;
}

std::string file_digest(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return "";
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a(ss.str()));
}

// Everything needed to repeat a run. No timestamps, so identical runs yield
// identical manifests.
struct RunManifest {
  std::string subcommand;
  json parameters = json::object();
  std::vector<std::string> inputs = {};
  std::vector<std::string> outputs = {};

  json to_json() const {
    json in = json::array(), out = json::array();
    for (const auto& p : inputs) in.push_back({{"path", p}, {"fnv1a", file_digest(p)}});
    for (const auto& p : outputs) out.push_back({{"path", p}, {"fnv1a", file_digest(p)}});
    return {{"subcommand", subcommand},
            {"tool_version", TRIBUNAL_VERSION},
            {"schema_version", kFeatureSchemaVersion},
            {"parameters", parameters},
            {"inputs", in},
            {"outputs", out}};
  }
};

void write_manifest(const RunManifest& m, const std::string& explicit_path, const std::string& primary_output) {
  fs::path path;
  if (!explicit_path.empty())
    path = explicit_path;
  else if (!primary_output.empty())
    path = fs::path(primary_output).string() + ".manifest.json";
  else
    return;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << m.to_json().dump(2) << '\n';
  log("manifest written to " + path.string());
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

ValenceLexicon lexicon_from(const json& p) {
  const std::string path = get_or<std::string>(p, "lexicon", "");
  if (path.empty()) return builtin_lexicon();
  return load_lexicon(path);
}

Task task_from(const json& p) {
  const std::string s = get_or<std::string>(p, "task", "decision");
  const auto t = parse_task(s);
  if (!t) throw UsageError("unknown task '" + s + "' (decision, om_pardon, om_punish)");
  return *t;
}

ModelKind model_from(const json& p) {
  const std::string s = get_or<std::string>(p, "model", "full");
  const auto m = parse_model_kind(s);
  if (!m) throw UsageError("unknown model '" + s + "' (performance, report, chat, full)");
  return *m;
}

TrainConfig forest_from(const json& p) {
  TrainConfig c;
  c.n_trees = get_or<std::size_t>(p, "trees", c.n_trees);
  if (p.contains("max_depth")) c.max_depth = get_or<std::size_t>(p, "max_depth", 0);
  c.min_leaf = get_or<std::size_t>(p, "min_leaf", c.min_leaf);
  if (p.contains("mtry")) c.features_per_split = get_or<std::size_t>(p, "mtry", 0);
  c.bootstrap = !get_or<bool>(p, "no_bootstrap", false);
  c.rng_seed = get_or<std::uint64_t>(p, "seed", c.rng_seed);
  try {
    c.validate(kFullFeatures);
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  return c;
}

EvalConfig eval_from(const json& p) {
  EvalConfig c;
  c.forest = forest_from(p);
  c.test_fraction = get_or<double>(p, "test_fraction", c.test_fraction);
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) throw UsageError("--test-fraction must be in (0, 1)");
  c.split_seed = get_or<std::uint64_t>(p, "split_seed", c.split_seed);
  c.threads = get_or<unsigned>(p, "threads", 1);
  return c;
}

void bind_forest(Params& ps) {
  ps.bind<std::size_t>("--trees", "/trees", "Number of trees (200)")
      .bind<std::size_t>("--max-depth", "/max_depth", "Depth limit (unlimited)")
      .bind<std::size_t>("--min-leaf", "/min_leaf", "Minimum rows per leaf (5)")
      .bind<std::size_t>("--mtry", "/mtry", "Candidate features per split (ceil sqrt d)")
      .flag("--no-bootstrap", "/no_bootstrap", "Grow every tree on all rows")
      .bind<std::uint64_t>("--seed", "/seed", "Forest seed (1)")
      .bind<unsigned>("--threads", "/threads", "Worker threads; results do not depend on it");
}

void bind_input(Params& ps, const std::string& prefix = "") {
  const std::string key = prefix.empty() ? "" : prefix + "_";
  const std::string flag = prefix.empty() ? "" : prefix + "-";
  ps.bind<std::string>("--" + flag + "in", "/" + key + "in", "Cases file (JSON Lines)")
      .bind<std::string>("--" + flag + "features", "/" + key + "features", "Feature CSV instead of cases");
}

// Full-schema feature matrix from either a cases file or a feature CSV.
FeatureMatrix load_matrix(const json& p, RunManifest& manifest, const std::string& prefix = "") {
  const std::string key = prefix.empty() ? "" : prefix + "_";
  const std::string cases = get_or<std::string>(p, (key + "in").c_str(), "");
  const std::string csv = get_or<std::string>(p, (key + "features").c_str(), "");
  if (cases.empty() == csv.empty())
    throw UsageError("give exactly one of --" + (prefix.empty() ? "" : prefix + "-") + "in and --" +
                     (prefix.empty() ? "" : prefix + "-") + "features");
  if (!cases.empty()) {
    manifest.inputs.push_back(cases);
    const auto data = load_dataset(cases);
    log("loaded " + std::to_string(data.size()) + " cases from " + cases);
    return extract_matrix(data, lexicon_from(p), ModelKind::Full);
  }
  manifest.inputs.push_back(csv);
  std::ifstream in(csv);
  if (!in) throw DataError("cannot read " + csv);
  FeatureMatrix m = read_feature_csv(in);
  if (m.names != feature_schema().names)
    throw DataError(csv + ": expected the full " + std::to_string(kFullFeatures) + "-column schema");
  return m;
}

std::vector<std::uint8_t> labels_or_fail(const FeatureMatrix& m, Task task, const std::string& what) {
  auto labels = task_labels(m, task);
  std::size_t pos = 0;
  for (auto l : labels) pos += l;
  if (pos == 0 || pos == labels.size())
    throw DataError(what + " needs both " + std::string(positive_label_name(task)) + " and other cases");
  return labels;
}

// ---------------------------------------------------------------------------

int cmd_gen(const json& p, const Params& ps) {
  json gen = p.contains("generator") ? p.at("generator") : json::object();
  const std::string preset = get_or<std::string>(p, "preset", "default");
  GeneratorConfig base;
  if (preset == "low-signal" || preset == "low_signal")
    base = GeneratorConfig::low_signal();
  else if (preset != "default")
    throw UsageError("unknown preset '" + preset + "' (default, low-signal)");
  json merged = base.to_json();
  merged.merge_patch(gen);
  GeneratorConfig config;
  try {
    config = GeneratorConfig::from_json(merged);
    config.validate();
  } catch (const json::exception& e) {
    throw UsageError(std::string("generator config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("generator config: ") + e.what());
  }

  const fs::path out = require_str(p, "out", "--out");
  const fs::path truth = get_or<std::string>(p, "truth", (out.parent_path() / "ground_truth.jsonl").string());
  const ValenceLexicon lexicon = lexicon_from(p);
  const SyntheticCorpus corpus = generate_dataset(config, lexicon, get_or<unsigned>(p, "threads", 1));
  {
    auto f = open_out(out);
    write_dataset(f, corpus.cases);
  }
  {
    auto f = open_out(truth);
    write_ground_truth(f, corpus.truth);
  }
  log("wrote " + std::to_string(corpus.cases.size()) + " cases to " + out.string());

  RunManifest m{"gen", {{"generator", config.to_json()}, {"preset", preset}}, {}, {out.string(), truth.string()}};
  if (const std::string lex = get_or<std::string>(p, "lexicon", ""); !lex.empty()) m.inputs.push_back(lex);
  if (!corpus.cases.empty()) m.parameters["dominant_feature"] = corpus.dominant_feature();
  write_manifest(m, ps.manifest_path(), out.string());
  return 0;
}

int cmd_validate(const json& p, const Params& ps) {
  const std::string path = require_str(p, "in", "--in");
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::string line;
  std::size_t line_no = 0, cases = 0, bad = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++cases;
    try {
      const Case c = parse_case(line);
      for (const Violation& v : validate_case(c)) {
        std::cout << "line " << line_no << ": " << v.to_string() << '\n';
        ++bad;
      }
    } catch (const SchemaError& e) {
      std::cout << "line " << line_no << ": " << e.what() << '\n';
      ++bad;
    }
  }
  std::cout << cases << " cases checked, " << bad << " problems\n";
  RunManifest m{"validate", {{"in", path}}, {path}, {}};
  write_manifest(m, ps.manifest_path(), "");
  return bad == 0 ? 0 : 2;
}

int cmd_summarize(const json& p, const Params& ps) {
  const std::string path = require_str(p, "in", "--in");
  const auto cases = load_dataset(path);
  const DatasetSummary s = summarize_dataset(cases);
  if (get_or<bool>(p, "json", false))
    std::cout << summary_to_json(s).dump(2) << '\n';
  else
    std::cout << format_summary_table(s);
  const std::string out = get_or<std::string>(p, "out", "");
  RunManifest m{"summarize", {{"in", path}}, {path}, {}};
  if (!out.empty()) {
    auto f = open_out(out);
    f << summary_to_json(s).dump(2) << '\n';
    m.outputs.push_back(out);
  }
  write_manifest(m, ps.manifest_path(), out);
  return 0;
}

int cmd_extract(const json& p, const Params& ps) {
  const std::string in = require_str(p, "in", "--in");
  const fs::path out = require_str(p, "out", "--out");
  const ModelKind model = model_from(p);
  const auto cases = load_dataset(in);
  const FeatureMatrix m = extract_matrix(cases, lexicon_from(p), model);
  {
    auto f = open_out(out);
    write_feature_csv(f, m);
  }
  const fs::path schema_path = out.string() + ".schema.json";
  {
    auto f = open_out(schema_path);
    f << schema_for(model).to_manifest().dump(2) << '\n';
  }
  log("extracted " + std::to_string(m.cols()) + " features for " + std::to_string(m.rows()) + " cases");
  RunManifest man{"extract", {{"model", to_string(model)}}, {in}, {out.string(), schema_path.string()}};
  if (const std::string lex = get_or<std::string>(p, "lexicon", ""); !lex.empty()) man.inputs.push_back(lex);
  write_manifest(man, ps.manifest_path(), out.string());
  return 0;
}

int cmd_train(const json& p, const Params& ps) {
  RunManifest man{"train"};
  const FeatureMatrix full = load_matrix(p, man);
  const Task task = task_from(p);
  const ModelKind model = model_from(p);
  const TrainConfig config = forest_from(p);
  const fs::path out = require_str(p, "out", "--out");
  const FeatureMatrix m = model == ModelKind::Full ? full : full.select_model(model);
  const auto labels = labels_or_fail(m, task, "training set");
  RandomForest forest = fit_forest(MatrixView{m.values, m.cols(), labels}, m.names, config, m.schema_version,
                                   get_or<unsigned>(p, "threads", 1));
  forest.metadata = {{"task", to_string(task)}, {"model", to_string(model)}, {"n_train", m.rows()}};
  {
    auto f = open_out(out);
    f << forest_to_json(forest).dump() << '\n';
  }
  log("trained " + std::to_string(forest.trees.size()) + " trees on " + std::to_string(m.rows()) + " cases");
  man.parameters = {{"task", to_string(task)}, {"model", to_string(model)}, {"forest", config.to_json()}};
  man.outputs.push_back(out.string());
  write_manifest(man, ps.manifest_path(), out.string());
  return 0;
}

RandomForest load_model(const std::string& path, ModelKind* kind) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read model " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("model " + path + ": " + e.what());
  }
  const std::string model_name = j.contains("metadata") ? j["metadata"].value("model", "full") : "full";
  const auto model = parse_model_kind(model_name);
  if (!model) throw DataError("model " + path + ": unknown model kind " + model_name);
  *kind = *model;
  const FeatureSchema expected = schema_for(*model);
  try {
    return forest_from_json(j, &expected);
  } catch (const ContractError& e) {
    throw DataError("model " + path + ": " + e.what());
  } catch (const json::exception& e) {
    throw DataError("model " + path + ": " + e.what());
  }
}

int cmd_predict(const json& p, const Params& ps) {
  RunManifest man{"predict"};
  const std::string model_path = require_str(p, "model_file", "--model-file");
  ModelKind kind = ModelKind::Full;
  const RandomForest forest = load_model(model_path, &kind);
  man.inputs.push_back(model_path);
  const FeatureMatrix full = load_matrix(p, man);
  const FeatureMatrix m = kind == ModelKind::Full ? full : full.select_model(kind);
  std::vector<std::uint8_t> dummy(m.rows(), 0);
  const auto scores = predict_all(forest, MatrixView{m.values, m.cols(), dummy}, get_or<unsigned>(p, "threads", 1));
  const std::string out = get_or<std::string>(p, "out", "");
  std::ofstream file;
  if (!out.empty()) file = open_out(out);
  std::ostream& os = out.empty() ? std::cout : file;
  os << "row,score,decision,agreement\n";
  char buf[64];
  for (std::size_t i = 0; i < scores.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g", scores[i]);
    os << i << ',' << buf << ',' << to_string(m.labels[i]) << ',' << to_string(m.agreements[i]) << '\n';
  }
  man.parameters = {{"model", to_string(kind)}};
  if (!out.empty()) man.outputs.push_back(out);
  file.close();
  write_manifest(man, ps.manifest_path(), out);
  return 0;
}

int cmd_rank(const json& p, const Params& ps) {
  RunManifest man{"rank"};
  const FeatureMatrix full = load_matrix(p, man);
  const Task task = task_from(p);
  const ModelKind model = model_from(p);
  const std::size_t top = get_or<std::size_t>(p, "top", 5);
  const std::size_t bins = get_or<std::size_t>(p, "bins", 10);
  if (bins < 2) throw UsageError("--bins must be at least 2");
  const FeatureMatrix m = model == ModelKind::Full ? full : full.select_model(model);
  const auto labels = labels_or_fail(m, task, "ranking input");
  const auto gains = rank_features_information_gain(MatrixView{m.values, m.cols(), labels}, m.names, bins);
  json ranked = json::array();
  std::cout << "rank\tfeature\tinformation_gain_bits\n";
  char buf[32];
  for (std::size_t i = 0; i < std::min(top, gains.size()); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f", gains[i].gain);
    std::cout << (i + 1) << '\t' << gains[i].name << '\t' << buf << '\n';
    ranked.push_back({{"rank", i + 1}, {"feature", gains[i].name}, {"gain", gains[i].gain}});
  }
  man.parameters = {{"task", to_string(task)}, {"model", to_string(model)}, {"top", top}, {"bins", bins}};
  const std::string out = get_or<std::string>(p, "out", "");
  if (!out.empty()) {
    auto f = open_out(out);
    f << ranked.dump(2) << '\n';
    man.outputs.push_back(out);
  }
  write_manifest(man, ps.manifest_path(), out);
  return 0;
}

std::string slug(const ExperimentReport& r) {
  std::string s = std::string(to_string(r.task)) + "_" + std::string(to_string(r.model)) + "_" +
                  r.train_selector.to_string() + "_to_" + r.test_selector.to_string();
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') c = '-';
  return s;
}

void write_reports(const fs::path& dir, const std::vector<ExperimentReport>& reports, RunManifest& man) {
  fs::create_directories(dir);
  const fs::path csv = dir / "reports.csv";
  {
    auto f = open_out(csv);
    write_reports_csv(f, reports);
  }
  man.outputs.push_back(csv.string());
  for (const ExperimentReport& r : reports) {
    const fs::path js = dir / (slug(r) + ".json");
    const fs::path roc = dir / (slug(r) + ".roc.csv");
    {
      auto f = open_out(js);
      f << r.to_json(false).dump(2) << '\n';
    }
    {
      auto f = open_out(roc);
      write_roc_csv(f, r.curve);
    }
    man.outputs.push_back(js.string());
    man.outputs.push_back(roc.string());
    std::cout << to_string(r.task) << '\t' << to_string(r.model) << '\t' << r.train_selector.to_string() << '\t'
              << r.test_selector.to_string() << '\t' << format_auc(r.auc) << '\n';
  }
}

void bind_eval(Params& ps) {
  bind_forest(ps);
  ps.bind<double>("--test-fraction", "/test_fraction", "Held-out share per label (0.2)")
      .bind<std::uint64_t>("--split-seed", "/split_seed", "Seed of the train/test split (7)")
      .bind<std::string>("--task", "/task", "decision, om_pardon or om_punish")
      .bind<std::string>("--lexicon", "/lexicon", "Valence lexicon (built-in when omitted)")
      .bind<std::string>("--out-dir", "/out_dir", "Directory for reports.csv, per-experiment JSON and ROC CSV");
}

int run_eval(const std::string& name, const json& p, const Params& ps,
             const std::function<std::vector<ExperimentReport>(const EvalConfig&, RunManifest&)>& body) {
  RunManifest man{name};
  const EvalConfig config = eval_from(p);
  const fs::path dir = require_str(p, "out_dir", "--out-dir");
  std::vector<ExperimentReport> reports;
  try {
    reports = body(config, man);
  } catch (const ExperimentError& e) {
    throw DataError(e.what());
  }
  man.parameters = config.to_json();
  man.parameters["task"] = to_string(task_from(p));
  std::cout << "task\tmodel\ttrain\ttest\tauc\n";
  write_reports(dir, reports, man);
  write_manifest(man, ps.manifest_path().empty() ? (dir / "manifest.json").string() : ps.manifest_path(), "");
  return 0;
}

int cmd_impact(const json& p, const Params& ps) {
  auto num = [&](const char* key, double fallback) {
    if (!p.contains(key)) return fallback;
    return get_or<double>(p, key, fallback);
  };
  EconomyParams e;
  e.ip_per_vote = num("ip_per_vote", e.ip_per_vote);
  e.champion_ip = num("champion_ip", e.champion_ip);
  e.champion_rp = num("champion_rp", e.champion_rp);
  e.usd_per_bundle = num("usd_per_bundle", e.usd_per_bundle);
  e.rp_per_bundle = num("rp_per_bundle", e.rp_per_bundle);
  ThroughputParams t;
  t.total_votes = num("total_votes", t.total_votes);
  t.toxic_players = num("toxic_players", t.toxic_players);
  t.votes_first_year = num("votes_first_year", t.votes_first_year);
  t.votes_per_second = num("votes_per_second", t.votes_per_second);
  t.majority_vote_fraction = num("majority_vote_fraction", t.majority_vote_fraction);
  PopulationParams pop;
  pop.daily_players = num("daily_players", pop.daily_players);
  pop.minutes_per_day = num("minutes_per_day", pop.minutes_per_day);
  pop.match_minutes = num("match_minutes", pop.match_minutes);
  pop.matches_per_day = num("matches_per_day", pop.matches_per_day);
  pop.innocents_per_match = num("innocents_per_match", pop.innocents_per_match);
  ImpactReport r;
  try {
    r = compute_impact(e, t, pop, get_or<bool>(p, "paper_mode", false));
  } catch (const ImpactError& err) {
    throw UsageError(err.what());
  }
  std::cout << r.to_table() << '\n' << r.to_json().dump(2) << '\n';
  RunManifest man{"impact", r.to_json()};
  const std::string out = get_or<std::string>(p, "out", "");
  if (!out.empty()) {
    auto f = open_out(out);
    f << r.to_json().dump(2) << '\n';
    man.outputs.push_back(out);
  }
  write_manifest(man, ps.manifest_path(), out);
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Predict crowdsourced verdicts on reported toxic players", "tribunal"};
  app.set_version_flag("--version", TRIBUNAL_VERSION);
  app.add_flag("-q,--quiet", g_quiet, "Suppress log messages");
  app.require_subcommand(1);

  struct Command {
    CLI::App* app;
    std::unique_ptr<Params> params;
    std::function<int(const json&, const Params&)> run;
  };
  std::vector<Command> commands;
  auto add = [&](const char* name, const char* help, std::function<int(const json&, const Params&)> fn) -> Params& {
    CLI::App* sub = app.add_subcommand(name, help);
    commands.push_back({sub, std::make_unique<Params>(sub), std::move(fn)});
    return *commands.back().params;
  };

  add("gen", "Generate a synthetic corpus and its ground-truth log", cmd_gen)
      .bind<std::size_t>("--n-cases,--n", "/generator/n_cases", "Number of cases (1000)")
      .bind<std::uint64_t>("--rng-seed,--seed", "/generator/rng_seed", "Generator seed (42)")
      .bind<std::string>("--region", "/generator/region", "na, euw or kr")
      .bind<double>("--punish-rate", "/generator/punish_rate", "Share of latent toxic cases (0.5)")
      .bind<std::vector<double>>("--agreement-mix", "/generator/agreement_mix", "Majority, strong, overwhelming shares")
      .bind<std::vector<double>>("--flip-probability", "/generator/flip_probability", "Label flip chance per agreement level")
      .bind<std::vector<double>>("--valence-gap-scale", "/generator/valence_gap_scale", "Latent valence gap per agreement level")
      .bind<double>("--punished-mean", "/generator/valence_targets/punished_mean", "Target offender valence, punished")
      .bind<double>("--pardoned-mean", "/generator/valence_targets/pardoned_mean", "Target offender valence, pardoned")
      .bind<double>("--om-punished-mean", "/generator/valence_targets/om_punished_mean", "Same, overwhelming-majority punished")
      .bind<double>("--om-pardoned-mean", "/generator/valence_targets/om_pardoned_mean", "Same, overwhelming-majority pardoned")
      .bind<std::vector<double>>("--category-mix", "/generator/category_mix", "Seven primary-category weights")
      .bind<double>("--category-purity", "/generator/category_purity", "Chance a report names the primary category")
      .bind<std::vector<double>>("--ally-report-rate", "/generator/ally_report_rate", "Per-ally report chance [clean, toxic]")
      .bind<std::vector<double>>("--enemy-report-rate", "/generator/enemy_report_rate", "Per-enemy report chance [clean, toxic]")
      .bind<std::vector<double>>("--comment-rate", "/generator/comment_rate", "Report comment chance [clean, toxic]")
      .bind<double>("--report-rate-shift", "/generator/report_rate_shift", "Added to both report rates")
      .bind<std::vector<double>>("--offender-message-rate", "/generator/offender_message_rate", "Extra offender messages [clean, toxic]")
      .bind<double>("--other-message-rate", "/generator/other_message_rate", "Messages per team per match")
      .bind<double>("--bystander-valence", "/generator/bystander_valence", "Valence target of other players' chat")
      .bind<double>("--feeding-deaths-elevation", "/generator/feeding_deaths_elevation", "Extra deaths of toxic feeders")
      .bind<std::vector<double>>("--offender-win-rate", "/generator/offender_win_rate", "Win chance [clean, toxic]")
      .bind<std::string>("--preset", "/preset", "default or low-signal")
      .bind<std::string>("--lexicon", "/lexicon", "Valence lexicon (built-in when omitted)")
      .bind<std::string>("--out", "/out", "Cases output (JSON Lines)")
      .bind<std::string>("--truth", "/truth", "Ground-truth output (ground_truth.jsonl beside --out)")
      .bind<unsigned>("--threads", "/threads", "Worker threads; output does not depend on it");

  add("validate", "Check a cases file against the schema and domain rules", cmd_validate)
      .bind<std::string>("--in", "/in", "Cases file");

  add("summarize", "Count cases, matches and reports per region", cmd_summarize)
      .bind<std::string>("--in", "/in", "Cases file")
      .flag("--json", "/json", "Print JSON instead of the table")
      .bind<std::string>("--out", "/out", "Also write the JSON summary here");

  add("extract", "Write the feature matrix as CSV plus its schema manifest", cmd_extract)
      .bind<std::string>("--in", "/in", "Cases file")
      .bind<std::string>("--out", "/out", "Feature CSV")
      .bind<std::string>("--model", "/model", "performance, report, chat or full")
      .bind<std::string>("--lexicon", "/lexicon", "Valence lexicon (built-in when omitted)");

  {
    Params& ps = add("train", "Fit a random forest and save it as JSON", cmd_train);
    bind_input(ps);
    bind_forest(ps);
    ps.bind<std::string>("--task", "/task", "decision, om_pardon or om_punish")
        .bind<std::string>("--model", "/model", "performance, report, chat or full")
        .bind<std::string>("--lexicon", "/lexicon", "Valence lexicon (built-in when omitted)")
        .bind<std::string>("--out", "/out", "Model JSON");
  }
  {
    Params& ps = add("predict", "Score cases with a saved model", cmd_predict);
    bind_input(ps);
    ps.bind<std::string>("--model-file", "/model_file", "Model JSON from train")
        .bind<std::string>("--lexicon", "/lexicon", "Valence lexicon (built-in when omitted)")
        .bind<std::string>("--out", "/out", "Predictions CSV (standard output when omitted)")
        .bind<unsigned>("--threads", "/threads", "Worker threads");
  }
  {
    Params& ps = add("rank", "Rank features by information gain", cmd_rank);
    bind_input(ps);
    ps.bind<std::size_t>("--top", "/top", "How many features to print (5)")
        .bind<std::size_t>("--bins", "/bins", "Equal-frequency bins (10)")
        .bind<std::string>("--task", "/task", "decision, om_pardon or om_punish")
        .bind<std::string>("--model", "/model", "performance, report, chat or full")
        .bind<std::string>("--lexicon", "/lexicon", "Valence lexicon (built-in when omitted)")
        .bind<std::string>("--out", "/out", "Also write the ranking as JSON");
  }
  {
    Params& ps = add("eval-grid", "Train on each agreement level, test on each", [](const json& p, const Params& ps) {
      return run_eval("eval-grid", p, ps, [&](const EvalConfig& c, RunManifest& man) {
        return run_agreement_grid(load_matrix(p, man), c, task_from(p));
      });
    });
    bind_input(ps);
    bind_eval(ps);
  }
  {
    Params& ps = add("eval-models", "Compare performance, report, chat and full models",
                     [](const json& p, const Params& ps) {
                       return run_eval("eval-models", p, ps, [&](const EvalConfig& c, RunManifest& man) {
                         return run_model_comparison(load_matrix(p, man), task_from(p), c);
                       });
                     });
    bind_input(ps);
    bind_eval(ps);
  }
  {
    Params& ps = add("eval-portability", "Train on one corpus, test on another", [](const json& p, const Params& ps) {
      return run_eval("eval-portability", p, ps, [&](const EvalConfig& c, RunManifest& man) {
        const FeatureMatrix train = load_matrix(p, man, "train");
        const FeatureMatrix test = load_matrix(p, man, "test");
        return std::vector<ExperimentReport>{
            run_portability(train, test, task_from(p), model_from(p), get_or<bool>(p, "zero_test_chat", false), c)};
      });
    });
    bind_input(ps, "train");
    bind_input(ps, "test");
    bind_eval(ps);
    ps.bind<std::string>("--model", "/model", "performance, report, chat or full")
        .flag("--zero-test-chat", "/zero_test_chat", "Zero the test chat features (unreadable language)");
  }

  {
    Params& ps = add("impact", "Cost and victim-exposure estimates", cmd_impact);
    ps.flag("--paper-mode", "/paper_mode", "Price votes at the rounded $0.02")
        .bind<double>("--ip-per-vote", "/ip_per_vote", "Influence points per correct vote (5)")
        .bind<double>("--champion-ip", "/champion_ip", "Champion price in IP (450)")
        .bind<double>("--champion-rp", "/champion_rp", "Champion price in RP (260)")
        .bind<double>("--usd-per-bundle", "/usd_per_bundle", "USD per RP bundle (10)")
        .bind<double>("--rp-per-bundle", "/rp_per_bundle", "RP per bundle (1380)")
        .bind<double>("--total-votes", "/total_votes", "Votes cast overall (105e6)")
        .bind<double>("--toxic-players", "/toxic_players", "Players with verdicts (560000)")
        .bind<double>("--votes-first-year", "/votes_first_year", "Votes in the first year (47e6)")
        .bind<double>("--votes-per-second", "/votes_per_second", "Vote rate (1.49)")
        .bind<double>("--majority-vote-fraction", "/majority_vote_fraction", "Share of votes in majority (0.5)")
        .bind<double>("--daily-players", "/daily_players", "Players per day (12e6)")
        .bind<double>("--minutes-per-day", "/minutes_per_day", "Play time per player per day (83)")
        .bind<double>("--match-minutes", "/match_minutes", "Match length (37.5)")
        .bind<double>("--matches-per-day", "/matches_per_day", "Matches per player per day (2.21)")
        .bind<double>("--innocents-per-match", "/innocents_per_match", "Other players in a match (9)")
        .bind<std::string>("--out", "/out", "Also write the JSON here");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (const Command& c : commands) {
    if (!c.app->parsed()) continue;
    try {
      return c.run(c.params->resolve(), *c.params);
    } catch (const UsageError& e) {
      std::cerr << "tribunal " << c.app->get_name() << ": " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const DataError& e) {
    std::cerr << "tribunal: " << e.what() << '\n';
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "tribunal: " << e.what() << '\n';
    return 2;
  } catch (const DatasetError& e) {
    std::cerr << "tribunal: " << e.what() << '\n';
    return 2;
  } catch (const LexiconError& e) {
    std::cerr << "tribunal: " << e.what() << '\n';
    return 2;
  } catch (const InfeasibleTarget& e) {
    std::cerr << "tribunal: " << e.what() << '\n';
    return 2;
  } catch (const ExperimentError& e) {
    std::cerr << "tribunal: " << e.what() << '\n';
    return 2;
  } catch (const ContractError& e) {
    std::cerr << "tribunal: internal error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "tribunal: internal error: " << e.what() << '\n';
    return 3;
  }
}
