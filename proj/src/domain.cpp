#include "tribunal/domain.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tribunal {

namespace {

template <typename E, std::size_t N>
struct EnumNames {
  std::array<std::pair<E, std::string_view>, N> entries;

  std::string_view name(E e) const {
    for (const auto& [value, text] : entries)
      if (value == e) return text;
    return "?";
  }
  std::optional<E> parse(std::string_view s) const {
    for (const auto& [value, text] : entries)
      if (text == s) return value;
    return std::nullopt;
  }
};

constexpr EnumNames<Region, 3> kRegionNames{{{{Region::NA, "na"}, {Region::EUW, "euw"}, {Region::KR, "kr"}}}};
constexpr EnumNames<Decision, 2> kDecisionNames{{{{Decision::Punish, "punish"}, {Decision::Pardon, "pardon"}}}};
constexpr EnumNames<AgreementLevel, 3> kAgreementNames{{{{AgreementLevel::Majority, "majority"},
                                                         {AgreementLevel::StrongMajority, "strong_majority"},
                                                         {AgreementLevel::OverwhelmingMajority,
                                                          "overwhelming_majority"}}}};
constexpr EnumNames<ReportCategory, 7> kCategoryNames{{{{ReportCategory::AssistingEnemyTeam, "assisting_enemy_team"},
                                                        {ReportCategory::IntentionalFeeding, "intentional_feeding"},
                                                        {ReportCategory::OffensiveLanguage, "offensive_language"},
                                                        {ReportCategory::VerbalAbuse, "verbal_abuse"},
                                                        {ReportCategory::NegativeAttitude, "negative_attitude"},
                                                        {ReportCategory::InappropriateName, "inappropriate_name"},
                                                        {ReportCategory::Spamming, "spamming"}}}};
constexpr EnumNames<PlayerRole, 3> kRoleNames{
    {{{PlayerRole::Offender, "offender"}, {PlayerRole::Ally, "ally"}, {PlayerRole::Enemy, "enemy"}}}};
constexpr EnumNames<ReportSource, 2> kSourceNames{{{{ReportSource::Ally, "ally"}, {ReportSource::Enemy, "enemy"}}}};

using nlohmann::json;

std::string join_path(const std::string& parent, std::string_view child) {
  if (parent.empty()) return std::string(child);
  std::string out = parent;
  if (!child.empty() && child.front() != '[') out += '.';
  out += child;
  return out;
}

std::string indexed(std::string_view name, std::size_t i) {
  return std::string(name) + "[" + std::to_string(i) + "]";
}

// Strict object reader: every required key must exist, unknown keys are rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path, std::initializer_list<std::string_view> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(path_.empty() ? "<root>" : path_, "expected a JSON object");
    for (const auto& [key, _] : j_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw SchemaError(join_path(path_, key), "unknown field");
    }
  }

  const json& at(std::string_view key) const {
    auto it = j_.find(std::string(key));
    if (it == j_.end()) throw SchemaError(field(key), "missing required field");
    return *it;
  }
  bool has(std::string_view key) const { return j_.contains(std::string(key)); }
  std::string field(std::string_view key) const { return join_path(path_, key); }

  std::string string(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_string()) throw SchemaError(field(key), "expected a string");
    return v.get<std::string>();
  }
  double number(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_number()) throw SchemaError(field(key), "expected a number");
    return v.get<double>();
  }
  std::int64_t integer(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) throw SchemaError(field(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  bool boolean(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_boolean()) throw SchemaError(field(key), "expected a boolean");
    return v.get<bool>();
  }
  const json& array(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_array()) throw SchemaError(field(key), "expected an array");
    return v;
  }
  template <typename E, std::size_t N>
  E enumeration(std::string_view key, const EnumNames<E, N>& names) const {
    const std::string text = string(key);
    if (auto e = names.parse(text)) return *e;
    throw SchemaError(field(key), "unknown value \"" + text + "\"");
  }

 private:
  const json& j_;
  std::string path_;
};

PlayerStats player_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path,
                 {"role", "kills", "deaths", "assists", "damage_dealt", "damage_received", "gold_earned",
                  "time_played"});
  PlayerStats p;
  p.role = r.enumeration("role", kRoleNames);
  p.kills = r.integer("kills");
  p.deaths = r.integer("deaths");
  p.assists = r.integer("assists");
  p.damage_dealt = r.number("damage_dealt");
  p.damage_received = r.number("damage_received");
  p.gold_earned = r.number("gold_earned");
  p.time_played = r.number("time_played");
  return p;
}

Report report_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path, {"source", "category", "comment"});
  Report rep;
  rep.source = r.enumeration("source", kSourceNames);
  rep.category = r.enumeration("category", kCategoryNames);
  if (r.has("comment") && !r.at("comment").is_null()) rep.comment = r.string("comment");
  return rep;
}

ChatMessage chat_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path, {"speaker_role", "text"});
  return ChatMessage{r.enumeration("speaker_role", kRoleNames), r.string("text")};
}

Match match_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path, {"duration", "offender_won", "players", "reports", "chat"});
  Match m;
  m.duration = r.number("duration");
  m.offender_won = r.boolean("offender_won");
  const json& players = r.array("players");
  for (std::size_t i = 0; i < players.size(); ++i)
    m.players.push_back(player_from_json(players[i], r.field(indexed("players", i))));
  const json& reports = r.array("reports");
  for (std::size_t i = 0; i < reports.size(); ++i)
    m.reports.push_back(report_from_json(reports[i], r.field(indexed("reports", i))));
  const json& chat = r.array("chat");
  for (std::size_t i = 0; i < chat.size(); ++i)
    m.chat.push_back(chat_from_json(chat[i], r.field(indexed("chat", i))));
  return m;
}

// Counts code points; invalid continuation bytes still count as one character each.
std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char ch : s)
    if ((ch & 0xC0) != 0x80) ++n;
  return n;
}

std::string format_count(std::uint64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i != 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

}  // namespace

std::string_view to_string(Region r) { return kRegionNames.name(r); }
std::string_view to_string(Decision d) { return kDecisionNames.name(d); }
std::string_view to_string(AgreementLevel a) { return kAgreementNames.name(a); }
std::string_view to_string(ReportCategory c) { return kCategoryNames.name(c); }
std::string_view to_string(PlayerRole r) { return kRoleNames.name(r); }
std::string_view to_string(ReportSource s) { return kSourceNames.name(s); }

std::optional<Region> parse_region(std::string_view s) { return kRegionNames.parse(s); }
std::optional<Decision> parse_decision(std::string_view s) { return kDecisionNames.parse(s); }
std::optional<AgreementLevel> parse_agreement(std::string_view s) { return kAgreementNames.parse(s); }
std::optional<ReportCategory> parse_report_category(std::string_view s) { return kCategoryNames.parse(s); }
std::optional<PlayerRole> parse_player_role(std::string_view s) { return kRoleNames.parse(s); }
std::optional<ReportSource> parse_report_source(std::string_view s) { return kSourceNames.parse(s); }

std::string_view feature_prefix(ReportCategory c) {
  switch (c) {
    case ReportCategory::AssistingEnemyTeam: return "assisting.enemy.team";
    case ReportCategory::IntentionalFeeding: return "intentionally.feeding";
    case ReportCategory::OffensiveLanguage: return "offensive.language";
    case ReportCategory::VerbalAbuse: return "verbal.abuse";
    case ReportCategory::NegativeAttitude: return "negative.attitude";
    case ReportCategory::InappropriateName: return "inappropriate.name";
    case ReportCategory::Spamming: return "spamming";
  }
  return "?";
}

bool is_communication_category(ReportCategory c) {
  return c == ReportCategory::VerbalAbuse || c == ReportCategory::OffensiveLanguage ||
         c == ReportCategory::NegativeAttitude;
}

SchemaError::SchemaError(std::string field, const std::string& what)
    : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

DatasetError::DatasetError(std::size_t line, std::string field, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line),
      field_(std::move(field)) {}

Case case_from_json(const json& j) {
  ObjectReader r(j, "", {"case_id", "region", "decision", "agreement", "matches"});
  Case c;
  c.case_id = r.string("case_id");
  c.region = r.enumeration("region", kRegionNames);
  c.decision = r.enumeration("decision", kDecisionNames);
  c.agreement = r.enumeration("agreement", kAgreementNames);
  const json& matches = r.array("matches");
  for (std::size_t i = 0; i < matches.size(); ++i)
    c.matches.push_back(match_from_json(matches[i], indexed("matches", i)));
  return c;
}

json to_json(const Case& c) {
  json matches = json::array();
  for (const Match& m : c.matches) {
    json players = json::array();
    for (const PlayerStats& p : m.players) {
      players.push_back({{"role", to_string(p.role)},
                         {"kills", p.kills},
                         {"deaths", p.deaths},
                         {"assists", p.assists},
                         {"damage_dealt", p.damage_dealt},
                         {"damage_received", p.damage_received},
                         {"gold_earned", p.gold_earned},
                         {"time_played", p.time_played}});
    }
    json reports = json::array();
    for (const Report& rep : m.reports) {
      json jr = {{"source", to_string(rep.source)}, {"category", to_string(rep.category)}};
      if (rep.comment) jr["comment"] = *rep.comment;
      reports.push_back(std::move(jr));
    }
    json chat = json::array();
    for (const ChatMessage& msg : m.chat) chat.push_back({{"speaker_role", to_string(msg.speaker_role)}, {"text", msg.text}});
    matches.push_back({{"duration", m.duration},
                       {"offender_won", m.offender_won},
                       {"players", std::move(players)},
                       {"reports", std::move(reports)},
                       {"chat", std::move(chat)}});
  }
  return {{"case_id", c.case_id},
          {"region", to_string(c.region)},
          {"decision", to_string(c.decision)},
          {"agreement", to_string(c.agreement)},
          {"matches", std::move(matches)}};
}

std::string serialize_case(const Case& c) { return to_json(c).dump(-1, ' ', false, json::error_handler_t::strict); }

Case parse_case(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
  return case_from_json(j);
}

std::string Violation::to_string() const {
  std::string out = location.empty() ? "" : location + ": ";
  return out + type + "." + field + ": " + rule;
}

std::vector<Violation> validate_case(const Case& c) {
  std::vector<Violation> out;
  auto add = [&out](std::string type, std::string field, std::string rule, std::string location) {
    out.push_back({std::move(type), std::move(field), std::move(rule), std::move(location)});
  };

  if (c.case_id.empty()) add("Case", "case_id", "must be non-empty", "");
  const std::size_t n = c.matches.size();
  if (n < 1) add("Case", "matches", "count 0 < 1", "");
  if (n > kMaxMatchesPerCase)
    add("Case", "matches", "count " + std::to_string(n) + " > " + std::to_string(kMaxMatchesPerCase), "");

  for (std::size_t mi = 0; mi < n; ++mi) {
    const Match& m = c.matches[mi];
    const std::string where = indexed("matches", mi);
    if (!(m.duration > 0.0)) add("Match", "duration", "must be > 0", where);
    if (m.reports.empty()) add("Match", "reports", "count 0 < 1", where);

    if (m.players.size() != kPlayersPerMatch)
      add("Match", "players", "count " + std::to_string(m.players.size()) + " != 10", where);
    std::array<std::size_t, 3> role_counts{};
    for (const PlayerStats& p : m.players) ++role_counts[static_cast<std::size_t>(p.role)];
    const std::array<std::size_t, 3> expected{1, kAlliesPerMatch, kEnemiesPerMatch};
    for (std::size_t r = 0; r < 3; ++r) {
      if (role_counts[r] != expected[r]) {
        add("Match", "players",
            std::string(to_string(static_cast<PlayerRole>(r))) + " count " + std::to_string(role_counts[r]) +
                " != " + std::to_string(expected[r]),
            where);
      }
    }

    for (std::size_t pi = 0; pi < m.players.size(); ++pi) {
      const PlayerStats& p = m.players[pi];
      const std::string pwhere = where + "." + indexed("players", pi);
      auto non_negative = [&](std::string_view name, double v) {
        if (!(v >= 0.0)) add("PlayerStats", std::string(name), "must be >= 0", pwhere);
      };
      non_negative("kills", static_cast<double>(p.kills));
      non_negative("deaths", static_cast<double>(p.deaths));
      non_negative("assists", static_cast<double>(p.assists));
      non_negative("damage_dealt", p.damage_dealt);
      non_negative("damage_received", p.damage_received);
      non_negative("gold_earned", p.gold_earned);
      non_negative("time_played", p.time_played);
      if (p.time_played > m.duration) add("PlayerStats", "time_played", "exceeds match duration", pwhere);
    }

    for (std::size_t ri = 0; ri < m.reports.size(); ++ri) {
      const Report& rep = m.reports[ri];
      if (!rep.comment) continue;
      const std::string rwhere = where + "." + indexed("reports", ri);
      if (rep.comment->empty()) add("Report", "comment", "must be non-empty when present", rwhere);
      const std::size_t len = utf8_length(*rep.comment);
      if (len > kMaxCommentLength)
        add("Report", "comment", "length " + std::to_string(len) + " > 500", rwhere);
    }
  }
  return out;
}

std::vector<Case> read_dataset(std::istream& in) {
  std::vector<Case> cases;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DatasetError(line_no, "", std::string("malformed JSON: ") + e.what());
    }
    Case c;
    try {
      c = case_from_json(j);
    } catch (const SchemaError& e) {
      throw DatasetError(line_no, e.field(), e.what());
    }
    if (auto violations = validate_case(c); !violations.empty()) {
      std::string msg = "case \"" + c.case_id + "\" violates invariants:";
      for (const auto& v : violations) msg += " " + v.to_string() + ";";
      throw DatasetError(line_no, violations.front().field, msg);
    }
    cases.push_back(std::move(c));
  }
  if (in.bad()) throw DatasetError(0, "", "read failure");
  return cases;
}

std::vector<Case> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(0, "", "cannot open " + path.string());
  return read_dataset(in);
}

void write_dataset(std::ostream& out, std::span<const Case> cases) {
  for (const Case& c : cases) out << serialize_case(c) << '\n';
}

void save_dataset(const std::filesystem::path& path, std::span<const Case> cases) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError(0, "", "cannot write " + path.string());
  write_dataset(out, cases);
  if (!out) throw DatasetError(0, "", "write failure on " + path.string());
}

RegionTally DatasetSummary::total() const {
  RegionTally t;
  for (const auto& r : by_region) t += r;
  return t;
}

DatasetSummary& DatasetSummary::operator+=(const DatasetSummary& o) {
  for (std::size_t i = 0; i < by_region.size(); ++i) by_region[i] += o.by_region[i];
  return *this;
}

DatasetSummary summarize_dataset(std::span<const Case> cases) {
  DatasetSummary s;
  for (const Case& c : cases) {
    RegionTally& t = s.by_region[static_cast<std::size_t>(c.region)];
    ++t.cases;
    t.matches += c.matches.size();
    for (const Match& m : c.matches) t.reports += m.reports.size();
  }
  return s;
}

std::string format_summary_table(const DatasetSummary& s) {
  const std::array<Region, 3> columns{Region::EUW, Region::NA, Region::KR};
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-8s", "");
  out << buf;
  for (Region r : columns) {
    std::string name(to_string(r));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::toupper(ch); });
    std::snprintf(buf, sizeof buf, "%14s", name.c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%14s\n", "Total");
  out << buf;

  const RegionTally total = s.total();
  auto row = [&](const char* label, std::uint64_t RegionTally::*member) {
    std::snprintf(buf, sizeof buf, "%-8s", label);
    out << buf;
    for (Region r : columns) {
      std::snprintf(buf, sizeof buf, "%14s", format_count(s.region(r).*member).c_str());
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%14s\n", format_count(total.*member).c_str());
    out << buf;
  };
  row("Cases", &RegionTally::cases);
  row("Matches", &RegionTally::matches);
  row("Reports", &RegionTally::reports);
  return out.str();
}

json summary_to_json(const DatasetSummary& s) {
  json j = json::object();
  auto tally = [](const RegionTally& t) {
    return json{{"cases", t.cases}, {"matches", t.matches}, {"reports", t.reports}};
  };
  for (Region r : kAllRegions) j[std::string(to_string(r))] = tally(s.region(r));
  j["total"] = tally(s.total());
  return j;
}

}  // namespace tribunal
