#include "tribunal/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace tribunal {

namespace {

constexpr std::array<std::string_view, 9> kOffenderStats{
    "kills", "deaths", "assists", "kda", "damage.dealt", "damage.received", "gold", "gpm", "time.played"};

constexpr std::array<std::string_view, 8> kTeamStats{
    "kills.avg.per.player",         "deaths.avg.per.player", "assists.avg.per.player",
    "kda",                          "kda.avg.per.player",    "damage.dealt.avg.per.player",
    "damage.received.avg.per.player", "gpm"};

constexpr std::array<std::string_view, 4> kReportStats{
    "allied.report.count", "enemy.report.count", "allied.report.comment.count", "enemy.report.comment.count"};

constexpr std::array<std::string_view, 8> kChatStats{
    "offender.valence", "offender.valence.sd", "victim.valence",  "bystander.valence",
    "offender.chat.msgs", "offender.chat.msgs.sd", "total.chat.msgs", "total.chat.msgs.sd"};

constexpr std::array<std::string_view, 4> kCaseChatStats{
    "case.offender.valence", "case.all.valence", "case.offender.msg.count", "case.total.msg.count"};

FeatureSchema build_schema() {
  FeatureSchema s;
  s.version = std::string(kFeatureSchemaVersion);
  auto add = [&s](std::string name, FeatureFamily f) {
    s.names.push_back(std::move(name));
    s.families.push_back(f);
  };
  for (ReportCategory c : kAllReportCategories) {
    const std::string p(feature_prefix(c));
    for (std::string_view stat : kOffenderStats) {
      add(p + ".offender." + std::string(stat), FeatureFamily::Performance);
      add(p + ".offender." + std::string(stat) + ".sd", FeatureFamily::Performance);
    }
    for (std::string_view side : {"allies", "enemies"}) {
      for (std::string_view stat : kTeamStats) {
        add(p + "." + std::string(side) + "." + std::string(stat), FeatureFamily::Performance);
        add(p + "." + std::string(side) + "." + std::string(stat) + ".sd", FeatureFamily::Performance);
      }
    }
    add(p + ".match.count", FeatureFamily::Performance);
    add(p + ".loss.rate", FeatureFamily::Performance);
  }
  for (ReportCategory c : kAllReportCategories)
    for (std::string_view stat : kReportStats) add(std::string(feature_prefix(c)) + "." + std::string(stat), FeatureFamily::Report);
  for (ReportCategory c : kAllReportCategories)
    for (std::string_view stat : kChatStats) add(std::string(feature_prefix(c)) + "." + std::string(stat), FeatureFamily::Chat);
  for (std::string_view stat : kCaseChatStats) add(std::string(stat), FeatureFamily::Chat);
  return s;
}

// Mean and population standard deviation. Values are sorted first so the
// result is bit-identical under any permutation of the input.
struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(std::vector<double> v) {
  if (v.empty()) return {};
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double n = static_cast<double>(v.size());
  const double mean = sum / n;
  double sq = 0.0;
  for (double x : v) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / n)};
}

double mean_of(std::vector<double> v) { return mean_sd(std::move(v)).mean; }

// Per-match statistics of one team (allies or enemies).
struct TeamStats {
  std::array<double, 8> values{};  // aligned with kTeamStats
};

TeamStats team_stats(const Match& m, PlayerRole role) {
  double kills = 0, deaths = 0, assists = 0, kda_sum = 0, dealt = 0, received = 0, gpm = 0;
  std::int64_t total_kills = 0, total_deaths = 0, total_assists = 0;
  std::size_t n = 0;
  for (const PlayerStats& p : m.players) {
    if (p.role != role) continue;
    ++n;
    kills += static_cast<double>(p.kills);
    deaths += static_cast<double>(p.deaths);
    assists += static_cast<double>(p.assists);
    total_kills += p.kills;
    total_deaths += p.deaths;
    total_assists += p.assists;
    kda_sum += kda(p.kills, p.deaths, p.assists);
    dealt += p.damage_dealt;
    received += p.damage_received;
    gpm += gold_per_minute(p.gold_earned, m.duration);
  }
  TeamStats t;
  if (n == 0) return t;
  const double dn = static_cast<double>(n);
  t.values = {kills / dn,
              deaths / dn,
              assists / dn,
              kda(total_kills, total_deaths, total_assists),
              kda_sum / dn,
              dealt / dn,
              received / dn,
              gpm / dn};
  return t;
}

const PlayerStats* offender_of(const Match& m) {
  for (const PlayerStats& p : m.players)
    if (p.role == PlayerRole::Offender) return &p;
  return nullptr;
}

// Matches of a case grouped by their most common report type.
std::array<std::vector<const Match*>, kNumReportCategories> group_matches(const Case& c) {
  std::array<std::vector<const Match*>, kNumReportCategories> groups;
  for (const Match& m : c.matches) groups[index_of(most_common_report_type(m))].push_back(&m);
  return groups;
}

std::string format_float(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string_view to_string(FeatureFamily f) {
  switch (f) {
    case FeatureFamily::Performance: return "performance";
    case FeatureFamily::Report: return "report";
    case FeatureFamily::Chat: return "chat";
  }
  return "?";
}

std::string_view to_string(ModelKind m) {
  switch (m) {
    case ModelKind::Performance: return "performance";
    case ModelKind::Report: return "report";
    case ModelKind::Chat: return "chat";
    case ModelKind::Full: return "full";
  }
  return "?";
}

std::optional<FeatureFamily> parse_feature_family(std::string_view s) {
  for (FeatureFamily f : {FeatureFamily::Performance, FeatureFamily::Report, FeatureFamily::Chat})
    if (to_string(f) == s) return f;
  return std::nullopt;
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  for (ModelKind m : {ModelKind::Performance, ModelKind::Report, ModelKind::Chat, ModelKind::Full})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

std::string_view to_string(VictimScope v) {
  switch (v) {
    case VictimScope::Allies: return "allies";
    case VictimScope::Enemies: return "enemies";
    case VictimScope::AllPlayers: return "all_players";
  }
  return "?";
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  return std::nullopt;
}

nlohmann::json FeatureSchema::to_manifest() const {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i = 0; i < names.size(); ++i)
    features.push_back({{"name", names[i]}, {"family", to_string(families[i])}});
  nlohmann::json counts = {{"performance", 0}, {"report", 0}, {"chat", 0}};
  for (FeatureFamily f : families) counts[std::string(to_string(f))] = counts[std::string(to_string(f))].get<int>() + 1;
  return {{"schema_version", version}, {"size", names.size()}, {"family_counts", counts}, {"features", features}};
}

FeatureSchema FeatureSchema::from_manifest(const nlohmann::json& j) {
  FeatureSchema s;
  if (!j.is_object() || !j.contains("schema_version") || !j.contains("features"))
    throw SchemaError("<manifest>", "expected schema_version and features");
  s.version = j.at("schema_version").get<std::string>();
  for (const auto& f : j.at("features")) {
    const auto family = parse_feature_family(f.at("family").get<std::string>());
    if (!family) throw SchemaError("features.family", "unknown family");
    s.names.push_back(f.at("name").get<std::string>());
    s.families.push_back(*family);
  }
  return s;
}

const FeatureSchema& feature_schema() {
  static const FeatureSchema schema = build_schema();
  return schema;
}

ColumnRange model_columns(ModelKind model) {
  switch (model) {
    case ModelKind::Performance: return {0, kPerformanceFeatures};
    case ModelKind::Report: return {kPerformanceFeatures, kReportFeatures};
    case ModelKind::Chat: return {kPerformanceFeatures + kReportFeatures, kChatFeatures};
    case ModelKind::Full: return {0, kFullFeatures};
  }
  return {0, kFullFeatures};
}

FeatureSchema schema_for(ModelKind model) {
  const FeatureSchema& full = feature_schema();
  const ColumnRange r = model_columns(model);
  FeatureSchema s;
  s.version = full.version;
  s.names.assign(full.names.begin() + r.first, full.names.begin() + r.first + r.count);
  s.families.assign(full.families.begin() + r.first, full.families.begin() + r.first + r.count);
  return s;
}

ReportCategory most_common_report_type(const Match& match) {
  std::array<std::size_t, kNumReportCategories> counts{};
  for (const Report& r : match.reports) ++counts[index_of(r.category)];
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] > counts[best]) best = i;
  return kAllReportCategories[best];
}

VictimScope victim_scope(const Match& match) {
  const ReportCategory category = most_common_report_type(match);
  if (!is_communication_category(category))
    throw ContractError("victim_scope: most common report type " + std::string(to_string(category)) +
                        " is not a communication category");
  bool ally = false, enemy = false;
  for (const Report& r : match.reports) (r.source == ReportSource::Ally ? ally : enemy) = true;
  if (ally && enemy) return VictimScope::AllPlayers;
  return ally ? VictimScope::Allies : VictimScope::Enemies;
}

double kda(std::int64_t kills, std::int64_t deaths, std::int64_t assists) {
  return static_cast<double>(kills + assists) / static_cast<double>(deaths + 1);
}

double gold_per_minute(double gold, double duration_seconds) {
  return duration_seconds > 0.0 ? gold / (duration_seconds / 60.0) : 0.0;
}

std::vector<double> extract_performance_features(const Case& c) {
  std::vector<double> out;
  out.reserve(kPerformanceFeatures);
  for (const auto& group : group_matches(c)) {
    std::array<std::vector<double>, kOffenderStats.size()> offender;
    std::array<std::vector<double>, kTeamStats.size()> allies, enemies;
    double losses = 0.0;
    for (const Match* m : group) {
      const PlayerStats* o = offender_of(*m);
      const PlayerStats p = o ? *o : PlayerStats{};
      const std::array<double, kOffenderStats.size()> row{static_cast<double>(p.kills),
                                                           static_cast<double>(p.deaths),
                                                           static_cast<double>(p.assists),
                                                           kda(p.kills, p.deaths, p.assists),
                                                           p.damage_dealt,
                                                           p.damage_received,
                                                           p.gold_earned,
                                                           gold_per_minute(p.gold_earned, m->duration),
                                                           p.time_played};
      for (std::size_t i = 0; i < row.size(); ++i) offender[i].push_back(row[i]);
      const TeamStats a = team_stats(*m, PlayerRole::Ally);
      const TeamStats e = team_stats(*m, PlayerRole::Enemy);
      for (std::size_t i = 0; i < kTeamStats.size(); ++i) {
        allies[i].push_back(a.values[i]);
        enemies[i].push_back(e.values[i]);
      }
      if (!m->offender_won) losses += 1.0;
    }
    for (auto& v : offender) {
      const MeanSd s = mean_sd(std::move(v));
      out.push_back(s.mean);
      out.push_back(s.sd);
    }
    for (auto* side : {&allies, &enemies}) {
      for (auto& v : *side) {
        const MeanSd s = mean_sd(std::move(v));
        out.push_back(s.mean);
        out.push_back(s.sd);
      }
    }
    const double n = static_cast<double>(group.size());
    out.push_back(n);
    out.push_back(group.empty() ? 0.0 : losses / n);
  }
  return out;
}

std::vector<double> extract_report_features(const Case& c) {
  std::vector<double> out;
  out.reserve(kReportFeatures);
  for (const auto& group : group_matches(c)) {
    std::array<std::vector<double>, kReportStats.size()> per_match;
    for (const Match* m : group) {
      std::array<double, kReportStats.size()> counts{};
      for (const Report& r : m->reports) {
        const bool ally = r.source == ReportSource::Ally;
        counts[ally ? 0 : 1] += 1.0;
        if (r.comment) counts[ally ? 2 : 3] += 1.0;
      }
      for (std::size_t i = 0; i < counts.size(); ++i) per_match[i].push_back(counts[i]);
    }
    for (auto& v : per_match) out.push_back(mean_of(std::move(v)));
  }
  return out;
}

std::vector<double> extract_chat_features(const Case& c, const ValenceLexicon& lexicon) {
  std::vector<double> out;
  out.reserve(kChatFeatures);
  for (const auto& group : group_matches(c)) {
    std::vector<double> offender_valence, victim_valence, bystander_valence, offender_msgs, total_msgs;
    for (const Match* m : group) {
      const RoleValences v = role_valences(lexicon, *m);
      const ReportCategory category = most_common_report_type(*m);
      double victim = v.allies, bystander = v.enemies;
      if (is_communication_category(category)) {
        switch (victim_scope(*m)) {
          case VictimScope::Allies: break;
          case VictimScope::Enemies: std::swap(victim, bystander); break;
          case VictimScope::AllPlayers: {
            ValenceAccumulator others(lexicon);
            for (const ChatMessage& msg : m->chat)
              if (msg.speaker_role != PlayerRole::Offender) others.add_text(msg.text);
            victim = others.value();
            bystander = 0.0;
            break;
          }
        }
      }
      double n_offender = 0.0;
      for (const ChatMessage& msg : m->chat)
        if (msg.speaker_role == PlayerRole::Offender) n_offender += 1.0;
      offender_valence.push_back(v.offender);
      victim_valence.push_back(victim);
      bystander_valence.push_back(bystander);
      offender_msgs.push_back(n_offender);
      total_msgs.push_back(static_cast<double>(m->chat.size()));
    }
    const MeanSd ov = mean_sd(std::move(offender_valence));
    const MeanSd om = mean_sd(std::move(offender_msgs));
    const MeanSd tm = mean_sd(std::move(total_msgs));
    out.insert(out.end(), {ov.mean, ov.sd, mean_of(std::move(victim_valence)), mean_of(std::move(bystander_valence)),
                           om.mean, om.sd, tm.mean, tm.sd});
  }

  ValenceAccumulator offender(lexicon), all(lexicon);
  double offender_count = 0.0, total_count = 0.0;
  for (const Match& m : c.matches) {
    for (const ChatMessage& msg : m.chat) {
      if (msg.speaker_role == PlayerRole::Offender) {
        offender.add_text(msg.text);
        offender_count += 1.0;
      }
      all.add_text(msg.text);
      total_count += 1.0;
    }
  }
  out.insert(out.end(), {offender.value(), all.value(), offender_count, total_count});
  return out;
}

FeatureVector extract_feature_vector(const Case& c, const ValenceLexicon& lexicon, ModelKind model) {
  FeatureVector v;
  v.model = model;
  v.label = c.decision;
  v.agreement = c.agreement;
  v.region = c.region;
  auto append = [&v](std::vector<double> part) { v.values.insert(v.values.end(), part.begin(), part.end()); };
  if (model == ModelKind::Performance || model == ModelKind::Full) append(extract_performance_features(c));
  if (model == ModelKind::Report || model == ModelKind::Full) append(extract_report_features(c));
  if (model == ModelKind::Chat || model == ModelKind::Full) append(extract_chat_features(c, lexicon));
  return v;
}

void FeatureMatrix::append(const FeatureVector& v) {
  if (v.values.size() != cols())
    throw ContractError("FeatureMatrix::append: vector has " + std::to_string(v.values.size()) + " values, matrix has " +
                        std::to_string(cols()) + " columns");
  values.insert(values.end(), v.values.begin(), v.values.end());
  labels.push_back(v.label);
  agreements.push_back(v.agreement);
  regions.push_back(v.region);
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  FeatureMatrix out;
  out.schema_version = schema_version;
  out.names = names;
  out.families = families;
  out.values.reserve(rows.size() * cols());
  for (std::size_t r : rows) {
    const auto src = row(r);
    out.values.insert(out.values.end(), src.begin(), src.end());
    out.labels.push_back(labels[r]);
    out.agreements.push_back(agreements[r]);
    out.regions.push_back(regions[r]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_model(ModelKind model) const {
  if (cols() != kFullFeatures) throw ContractError("select_model requires a full-schema matrix");
  const ColumnRange r = model_columns(model);
  FeatureMatrix out;
  out.schema_version = schema_version;
  out.names.assign(names.begin() + r.first, names.begin() + r.first + r.count);
  out.families.assign(families.begin() + r.first, families.begin() + r.first + r.count);
  out.values.reserve(rows() * r.count);
  for (std::size_t i = 0; i < rows(); ++i) {
    const auto src = row(i).subspan(r.first, r.count);
    out.values.insert(out.values.end(), src.begin(), src.end());
  }
  out.labels = labels;
  out.agreements = agreements;
  out.regions = regions;
  return out;
}

void FeatureMatrix::zero_family(FeatureFamily family) {
  for (std::size_t j = 0; j < cols(); ++j) {
    if (families[j] != family) continue;
    for (std::size_t i = 0; i < rows(); ++i) values[i * cols() + j] = 0.0;
  }
}

FeatureMatrix FeatureMatrix::concat(const FeatureMatrix& other) const {
  if (names != other.names || schema_version != other.schema_version)
    throw ContractError("FeatureMatrix::concat: column schemas differ");
  FeatureMatrix out = *this;
  out.values.insert(out.values.end(), other.values.begin(), other.values.end());
  out.labels.insert(out.labels.end(), other.labels.begin(), other.labels.end());
  out.agreements.insert(out.agreements.end(), other.agreements.begin(), other.agreements.end());
  out.regions.insert(out.regions.end(), other.regions.begin(), other.regions.end());
  return out;
}

FeatureMatrix empty_matrix(ModelKind model) {
  const FeatureSchema s = schema_for(model);
  FeatureMatrix m;
  m.schema_version = s.version;
  m.names = s.names;
  m.families = s.families;
  return m;
}

FeatureMatrix extract_matrix(std::span<const Case> cases, const ValenceLexicon& lexicon, ModelKind model) {
  FeatureMatrix m = empty_matrix(model);
  m.values.reserve(cases.size() * m.cols());
  for (const Case& c : cases) m.append(extract_feature_vector(c, lexicon, model));
  return m;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& m) {
  for (const std::string& name : m.names) out << name << ',';
  out << "label,agreement,region\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (double v : m.row(i)) out << format_float(v) << ',';
    out << to_string(m.labels[i]) << ',' << to_string(m.agreements[i]) << ',' << to_string(m.regions[i]) << '\n';
  }
}

FeatureMatrix read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("<header>", "empty feature file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 3 || header[header.size() - 3] != "label" || header[header.size() - 2] != "agreement" ||
      header.back() != "region")
    throw SchemaError("<header>", "expected trailing label,agreement,region columns");
  header.resize(header.size() - 3);

  const FeatureSchema& full = feature_schema();
  FeatureMatrix m;
  m.schema_version = full.version;
  for (const std::string& name : header) {
    const auto idx = full.index_of(name);
    if (!idx) throw SchemaError(name, "not a feature of schema " + full.version);
    m.names.push_back(name);
    m.families.push_back(full.families[*idx]);
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    const std::string where = "line " + std::to_string(line_no);
    if (cells.size() != m.cols() + 3) throw SchemaError(where, "expected " + std::to_string(m.cols() + 3) + " cells");
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[j], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cells[j].size() || cells[j].empty()) throw SchemaError(where + "." + m.names[j], "not a number");
      m.values.push_back(v);
    }
    const auto label = parse_decision(cells[m.cols()]);
    const auto agreement = parse_agreement(cells[m.cols() + 1]);
    const auto region = parse_region(cells[m.cols() + 2]);
    if (!label) throw SchemaError(where + ".label", "unknown value");
    if (!agreement) throw SchemaError(where + ".agreement", "unknown value");
    if (!region) throw SchemaError(where + ".region", "unknown value");
    m.labels.push_back(*label);
    m.agreements.push_back(*agreement);
    m.regions.push_back(*region);
  }
  return m;
}

}  // namespace tribunal
