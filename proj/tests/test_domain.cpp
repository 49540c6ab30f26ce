#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"
#include "tribunal/domain.hpp"
#include "tribunal/synth.hpp"

using namespace tribunal;
using nlohmann::json;
using testing_support::data_path;
using testing_support::read_file;
using testing_support::two_match_case;

namespace {

bool has_violation(const Case& c, const std::string& text) {
  for (const Violation& v : validate_case(c))
    if (v.to_string() == text) return true;
  return false;
}

std::string field_of_schema_error(const json& j) {
  try {
    case_from_json(j);
  } catch (const SchemaError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("enum strings parse exactly") {
  CHECK(parse_region("na") == Region::NA);
  CHECK(parse_region("euw") == Region::EUW);
  CHECK(parse_region("kr") == Region::KR);
  CHECK_FALSE(parse_region("NA"));
  CHECK_FALSE(parse_region("eune"));
  CHECK(parse_agreement("overwhelming_majority") == AgreementLevel::OverwhelmingMajority);
  CHECK(parse_report_category("assisting_enemy_team") == ReportCategory::AssistingEnemyTeam);
  // Categories excluded from the corpus are not representable.
  CHECK_FALSE(parse_report_category("leaving_afk"));
  CHECK_FALSE(parse_report_category("refusing_to_communicate"));
  CHECK_FALSE(parse_report_category("unskilled_player"));
  CHECK(kAllReportCategories.size() == 7);
  for (ReportCategory c : kAllReportCategories) CHECK(parse_report_category(to_string(c)) == c);
  CHECK(is_communication_category(ReportCategory::VerbalAbuse));
  CHECK(is_communication_category(ReportCategory::OffensiveLanguage));
  CHECK(is_communication_category(ReportCategory::NegativeAttitude));
  CHECK_FALSE(is_communication_category(ReportCategory::Spamming));
  CHECK(feature_prefix(ReportCategory::VerbalAbuse) == "verbal.abuse");
}

TEST_CASE("fixture case parses and validates") {
  const Case c = two_match_case();
  CHECK(c.case_id == "fixture-two-match");
  REQUIRE(c.matches.size() == 2);
  CHECK(c.matches[0].players.size() == 10);
  CHECK(c.matches[1].reports.size() == 3);
  CHECK(c.matches[0].reports[0].comment == "stop flaming");
  CHECK_FALSE(c.matches[0].reports[1].comment);
  CHECK(validate_case(c).empty());
}

TEST_CASE("serialize(parse(x)) is byte-identical for canonical input") {
  const Case c = two_match_case();
  const std::string once = serialize_case(c);
  CHECK(serialize_case(parse_case(once)) == once);
  CHECK(parse_case(once) == c);
  // Keys come out sorted.
  CHECK(once.rfind("{\"agreement\":", 0) == 0);

  std::istringstream corpus(read_file(data_path("corpus12.jsonl")));
  std::string line;
  std::size_t n = 0;
  while (std::getline(corpus, line)) {
    CHECK(serialize_case(parse_case(line)) == line);
    ++n;
  }
  CHECK(n == 12);
}

TEST_CASE("floats use shortest round-trip form and counts stay integers") {
  Case c = two_match_case();
  c.matches[0].duration = 0.1 + 0.2;
  c.matches[0].players[0].damage_dealt = 1e-7;
  const Case back = parse_case(serialize_case(c));
  CHECK(back.matches[0].duration == c.matches[0].duration);
  CHECK(back.matches[0].players[0].damage_dealt == 1e-7);
  const json j = json::parse(serialize_case(c));
  CHECK(j["matches"][0]["players"][0]["kills"].is_number_integer());
}

TEST_CASE("schema errors name the offending field") {
  const json base = to_json(two_match_case());

  json j = base;
  j["matches"][0]["players"][3]["role"] = "jungler";
  CHECK(field_of_schema_error(j) == "matches[0].players[3].role");

  j = base;
  j.erase("decision");
  CHECK(field_of_schema_error(j) == "decision");

  j = base;
  j["matches"][1]["reports"][0]["category"] = "leaving_afk";
  CHECK(field_of_schema_error(j) == "matches[1].reports[0].category");

  j = base;
  j["matches"][0]["players"][0]["kills"] = 2.5;
  CHECK(field_of_schema_error(j) == "matches[0].players[0].kills");

  j = base;
  j["matches"][0]["surprise"] = 1;
  CHECK(field_of_schema_error(j) == "matches[0].surprise");

  j = base;
  j["region"] = 3;
  CHECK(field_of_schema_error(j) == "region");

  CHECK_THROWS_AS(parse_case("{not json"), SchemaError);
}

TEST_CASE("validate_case reports each broken invariant") {
  const Case good = two_match_case();

  Case c = good;
  while (c.matches.size() < 6) c.matches.push_back(good.matches[0]);
  CHECK(has_violation(c, "Case.matches: count 6 > 5"));

  c = good;
  c.matches.clear();
  CHECK(has_violation(c, "Case.matches: count 0 < 1"));

  c = good;
  c.matches[1].players[2].role = PlayerRole::Offender;
  CHECK(has_violation(c, "matches[1]: Match.players: offender count 2 != 1"));
  CHECK(has_violation(c, "matches[1]: Match.players: ally count 3 != 4"));

  c = good;
  c.matches[0].reports.clear();
  CHECK(has_violation(c, "matches[0]: Match.reports: count 0 < 1"));

  c = good;
  c.matches[0].players[4].time_played = 1800.5;
  CHECK(has_violation(c, "matches[0].players[4]: PlayerStats.time_played: exceeds match duration"));

  c = good;
  c.matches[0].reports[0].comment = "";
  CHECK(has_violation(c, "matches[0].reports[0]: Report.comment: must be non-empty when present"));

  c = good;
  c.matches[0].reports[0].comment = std::string(501, 'x');
  CHECK_FALSE(validate_case(c).empty());
  c.matches[0].reports[0].comment = std::string(500, 'x');
  CHECK(validate_case(c).empty());

  c = good;
  c.matches[0].players[1].deaths = -1;
  CHECK(has_violation(c, "matches[0].players[1]: PlayerStats.deaths: must be >= 0"));

  for (const Violation& v : validate_case(c)) {
    CHECK_FALSE(v.type.empty());
    CHECK_FALSE(v.field.empty());
    CHECK_FALSE(v.rule.empty());
  }
}

TEST_CASE("read_dataset reports line numbers") {
  const std::string good = serialize_case(two_match_case());
  {
    std::istringstream in(good + "\n\n" + good + "\n");
    CHECK(read_dataset(in).size() == 2);
  }
  {
    std::istringstream in(good + "\n{oops\n");
    try {
      read_dataset(in);
      FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
      CHECK(e.line() == 2);
    }
  }
  {
    json j = json::parse(good);
    j["matches"][0]["duration"] = "long";
    std::istringstream in(good + "\n" + good + "\n" + j.dump() + "\n");
    try {
      read_dataset(in);
      FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
      CHECK(e.line() == 3);
      CHECK(e.field() == "matches[0].duration");
    }
  }
  {
    Case bad = two_match_case();
    bad.matches[0].players.pop_back();
    std::istringstream in(serialize_case(bad) + "\n");
    try {
      read_dataset(in);
      FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
      CHECK(e.line() == 1);
      CHECK(e.field() == "players");
    }
  }
  CHECK_THROWS_AS(load_dataset(data_path("does_not_exist.jsonl")), DatasetError);
}

TEST_CASE("summary of two NA cases") {
  Case a = two_match_case();
  a.matches.push_back(a.matches[0]);  // 3 matches, 2 + 3 + 2 = 7 reports
  Case b = two_match_case();
  b.matches[1].reports.pop_back();     // 2 matches, 2 + 2 = 4 reports
  const std::vector<Case> cases{a, b};
  const DatasetSummary s = summarize_dataset(cases);
  CHECK(s.region(Region::NA) == RegionTally{2, 5, 11});
  CHECK(s.region(Region::EUW) == RegionTally{});
  CHECK(s.total() == RegionTally{2, 5, 11});
}

TEST_CASE("summary of the 12-case fixture matches an independent count") {
  const auto cases = load_dataset(data_path("corpus12.jsonl"));
  std::istringstream in(read_file(data_path("corpus12.jsonl")));
  std::string line;
  std::uint64_t n = 0, matches = 0, reports = 0;
  while (std::getline(in, line)) {
    const json j = json::parse(line);
    CHECK(j["region"] == "euw");
    ++n;
    matches += j["matches"].size();
    for (const auto& m : j["matches"]) reports += m["reports"].size();
  }
  const DatasetSummary s = summarize_dataset(cases);
  CHECK(s.region(Region::EUW) == RegionTally{n, matches, reports});
  CHECK(s.total().cases == 12);

  const std::string table = format_summary_table(s);
  CHECK(table.find("EUW") < table.find("NA"));
  CHECK(table.find("NA") < table.find("KR"));
  CHECK(table.find("Total") != std::string::npos);
  CHECK(table.find("Reports") != std::string::npos);
  CHECK(summary_to_json(s)["euw"]["matches"] == matches);
}

TEST_CASE("summary table groups thousands") {
  DatasetSummary s;
  s.by_region[static_cast<std::size_t>(Region::NA)] = {1000, 2998, 1234567};
  s.by_region[static_cast<std::size_t>(Region::KR)] = {12, 999, 100};
  const std::string t = format_summary_table(s);
  CHECK(t.find("1,000") != std::string::npos);
  CHECK(t.find("1,234,567") != std::string::npos);
  CHECK(t.find("1,234,667") != std::string::npos);
  CHECK(t.find(" 999 ") != std::string::npos);
  CHECK(t.find(",12") == std::string::npos);
}

TEST_CASE("summaries add under concatenation") {
  GeneratorConfig cfg;
  cfg.n_cases = 40;
  const auto a = generate_dataset(cfg, builtin_lexicon()).cases;
  cfg.rng_seed = 9;
  cfg.region = Region::KR;
  const auto b = generate_dataset(cfg, builtin_lexicon()).cases;
  std::vector<Case> both = a;
  both.insert(both.end(), b.begin(), b.end());
  DatasetSummary sum = summarize_dataset(a);
  sum += summarize_dataset(b);
  CHECK(summarize_dataset(both) == sum);
}

TEST_CASE("dataset write then read round-trips") {
  const auto cases = load_dataset(data_path("corpus12.jsonl"));
  std::ostringstream out;
  write_dataset(out, cases);
  CHECK(out.str() == read_file(data_path("corpus12.jsonl")));
  std::istringstream in(out.str());
  CHECK(read_dataset(in) == cases);
}
