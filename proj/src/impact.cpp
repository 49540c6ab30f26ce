#include "tribunal/impact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

namespace tribunal {

namespace {

void positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ImpactError(std::string(name) + " must be positive and finite");
}

void non_negative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ImpactError(std::string(name) + " must be non-negative and finite");
}

std::string with_commas(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  const auto dot = s.find('.');
  std::string whole = s.substr(0, dot), frac = dot == std::string::npos ? "" : s.substr(dot);
  const bool negative = !whole.empty() && whole[0] == '-';
  if (negative) whole.erase(0, 1);
  for (int i = static_cast<int>(whole.size()) - 3; i > 0; i -= 3) whole.insert(static_cast<std::size_t>(i), ",");
  return (negative ? "-" : "") + whole + frac;
}

}  // namespace

void EconomyParams::validate() const {
  non_negative(ip_per_vote, "ip_per_vote");
  positive(champion_ip, "champion_ip");
  positive(champion_rp, "champion_rp");
  positive(usd_per_bundle, "usd_per_bundle");
  positive(rp_per_bundle, "rp_per_bundle");
}

void ThroughputParams::validate() const {
  non_negative(total_votes, "total_votes");
  positive(toxic_players, "toxic_players");
  non_negative(votes_first_year, "votes_first_year");
  positive(votes_per_second, "votes_per_second");
  if (!(majority_vote_fraction > 0.0 && majority_vote_fraction <= 1.0))
    throw ImpactError("majority_vote_fraction must be in (0, 1]");
}

void PopulationParams::validate() const {
  positive(daily_players, "daily_players");
  positive(minutes_per_day, "minutes_per_day");
  positive(match_minutes, "match_minutes");
  non_negative(matches_per_day, "matches_per_day");
  non_negative(innocents_per_match, "innocents_per_match");
}

double vote_cost_usd(const EconomyParams& e) {
  e.validate();
  return e.ip_per_vote * (e.champion_rp / e.champion_ip) * (e.usd_per_bundle / e.rp_per_bundle);
}

double votes_per_case(const ThroughputParams& t) {
  t.validate();
  return t.total_votes / t.toxic_players;
}

double seconds_per_case(const ThroughputParams& t) { return votes_per_case(t) / t.votes_per_second; }

double first_year_cost_usd(const ThroughputParams& t, const EconomyParams& e, bool paper_mode) {
  t.validate();
  const double price = paper_mode ? kRoundedVoteCostUsd : vote_cost_usd(e);
  return t.votes_first_year * t.majority_vote_fraction * price;
}

VictimReport victims_protected(const ThroughputParams& t, const PopulationParams& p) {
  p.validate();
  const double per_case = votes_per_case(t);
  if (!(per_case > 0.0)) throw ImpactError("votes per case must be positive");
  VictimReport r;
  r.toxic_per_day = t.votes_first_year / per_case / 365.0;
  r.toxic_matches_per_day = r.toxic_per_day * p.matches_per_day;
  r.innocents_exposed_per_day = r.toxic_matches_per_day * p.innocents_per_match;
  return r;
}

ImpactReport compute_impact(const EconomyParams& economy, const ThroughputParams& throughput,
                            const PopulationParams& population, bool paper_mode) {
  ImpactReport r;
  r.economy = economy;
  r.throughput = throughput;
  r.population = population;
  r.paper_mode = paper_mode;
  r.vote_cost = vote_cost_usd(economy);
  r.votes_per_case = votes_per_case(throughput);
  r.seconds_per_case = seconds_per_case(throughput);
  r.first_year_cost = first_year_cost_usd(throughput, economy, paper_mode);
  r.victims = victims_protected(throughput, population);
  return r;
}

nlohmann::json ImpactReport::to_json() const {
  return {{"paper_mode", paper_mode},
          {"economy",
           {{"ip_per_vote", economy.ip_per_vote},
            {"champion_ip", economy.champion_ip},
            {"champion_rp", economy.champion_rp},
            {"usd_per_bundle", economy.usd_per_bundle},
            {"rp_per_bundle", economy.rp_per_bundle}}},
          {"throughput",
           {{"total_votes", throughput.total_votes},
            {"toxic_players", throughput.toxic_players},
            {"votes_first_year", throughput.votes_first_year},
            {"votes_per_second", throughput.votes_per_second},
            {"majority_vote_fraction", throughput.majority_vote_fraction}}},
          {"population",
           {{"daily_players", population.daily_players},
            {"minutes_per_day", population.minutes_per_day},
            {"match_minutes", population.match_minutes},
            {"matches_per_day", population.matches_per_day},
            {"innocents_per_match", population.innocents_per_match}}},
          {"vote_cost_usd", vote_cost},
          {"votes_per_case", votes_per_case},
          {"seconds_per_case", seconds_per_case},
          {"first_year_cost_usd", first_year_cost},
          {"toxic_per_day", victims.toxic_per_day},
          {"toxic_matches_per_day", victims.toxic_matches_per_day},
          {"innocents_exposed_per_day", victims.innocents_exposed_per_day}};
}

std::string ImpactReport::to_table() const {
  const std::vector<std::pair<std::string, std::string>> rows{
      {"Cost per vote (USD)", with_commas(vote_cost, 4)},
      {"Votes per case", with_commas(votes_per_case, 1)},
      {"Seconds per case", with_commas(seconds_per_case, 2)},
      {std::string("First-year cost (USD") + (paper_mode ? ", $0.02/vote)" : ")"),
       paper_mode ? std::to_string(static_cast<long long>(std::llround(first_year_cost)))
                  : with_commas(first_year_cost, 2)},
      {"Toxic players warned per day", with_commas(victims.toxic_per_day, 2)},
      {"Toxic matches per day", with_commas(victims.toxic_matches_per_day, 2)},
      {"Innocent players exposed per day", with_commas(victims.innocents_exposed_per_day, 2)},
  };
  std::size_t width = 0;
  for (const auto& [label, _] : rows) width = std::max(width, label.size());
  std::string out;
  for (const auto& [label, value] : rows) out += label + std::string(width - label.size() + 2, ' ') + value + '\n';
  return out;
}

}  // namespace tribunal
