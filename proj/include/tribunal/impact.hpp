#pragma once

// Closed-form cost and victim-exposure estimates for crowdsourced review.

#include <stdexcept>

#include "json.hpp"

namespace tribunal {

class ImpactError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EconomyParams {
  double ip_per_vote = 5.0;
  double champion_ip = 450.0;
  double champion_rp = 260.0;
  double usd_per_bundle = 10.0;
  double rp_per_bundle = 1380.0;

  void validate() const;
};

struct ThroughputParams {
  double total_votes = 105'000'000.0;
  double toxic_players = 560'000.0;
  double votes_first_year = 47'000'000.0;
  double votes_per_second = 1.49;
  double majority_vote_fraction = 0.5;

  void validate() const;
};

struct PopulationParams {
  double daily_players = 12'000'000.0;
  double minutes_per_day = 83.0;
  double match_minutes = 37.5;
  double matches_per_day = 2.21;
  double innocents_per_match = 9.0;

  void validate() const;
};

/// Price of one vote when rounded to whole cents, as in the headline estimate.
inline constexpr double kRoundedVoteCostUsd = 0.02;

double vote_cost_usd(const EconomyParams& economy);
double votes_per_case(const ThroughputParams& throughput);
double seconds_per_case(const ThroughputParams& throughput);
/// paper_mode uses the rounded $0.02 per vote, otherwise the exact price.
double first_year_cost_usd(const ThroughputParams& throughput, const EconomyParams& economy, bool paper_mode);

struct VictimReport {
  double toxic_per_day = 0.0;
  double toxic_matches_per_day = 0.0;
  double innocents_exposed_per_day = 0.0;
};

VictimReport victims_protected(const ThroughputParams& throughput, const PopulationParams& population);

struct ImpactReport {
  EconomyParams economy;
  ThroughputParams throughput;
  PopulationParams population;
  bool paper_mode = false;
  double vote_cost = 0.0;
  double votes_per_case = 0.0;
  double seconds_per_case = 0.0;
  double first_year_cost = 0.0;
  VictimReport victims;

  nlohmann::json to_json() const;
  /// Labeled two-column table with thousands separators.
  std::string to_table() const;
};

ImpactReport compute_impact(const EconomyParams& economy, const ThroughputParams& throughput,
                            const PopulationParams& population, bool paper_mode);

}  // namespace tribunal
