#pragma once

// Seeded synthetic-case generator with transparent planted signals.
//
// Each case has a latent behavior class (toxic or not). The observed verdict
// equals the latent class except for a label flip whose probability falls as
// reviewer agreement rises. Every planted effect keys off the latent class:
//   - reports per match (allies and enemies report more often, and comment
//     more often, when the offender is toxic);
//   - offender chat volume;
//   - offender chat valence, drawn from a two-pool word mixture whose mean
//     is fitted so that observed-verdict means approximate the configured
//     targets;
//   - extra offender deaths in toxic intentional-feeding cases;
//   - a higher loss rate for toxic offenders.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tribunal/domain.hpp"
#include "tribunal/valence.hpp"

namespace tribunal {

struct ValenceTargets {
  double punished_mean = 5.725;
  double pardoned_mean = 5.779;
  double om_punished_mean = 5.699;
  double om_pardoned_mean = 5.751;

  bool operator==(const ValenceTargets&) const = default;
};

/// Per latent class: index 0 = not toxic (pardon), 1 = toxic (punish).
using ClassPair = std::array<double, 2>;

struct GeneratorConfig {
  std::size_t n_cases = 1000;
  Region region = Region::NA;
  double punish_rate = 0.5;
  std::array<double, 3> agreement_mix{0.03, 0.07, 0.90};  // majority, strong, overwhelming
  std::array<double, 3> flip_probability{0.25, 0.12, 0.03};
  ValenceTargets valence_targets;
  // Latent valence gap per agreement level, relative to the overwhelming one.
  // Reviewers agree more readily when the offender's chat is plainly hostile.
  std::array<double, 3> valence_gap_scale{0.0, 0.5, 1.0};

  std::array<double, kNumReportCategories> category_mix{0.06, 0.15, 0.15, 0.40, 0.12, 0.04, 0.08};
  double category_purity = 0.85;  // chance a report names the case's primary category

  ClassPair ally_report_rate{0.08, 0.70};   // per ally per match
  ClassPair enemy_report_rate{0.10, 0.20};  // per enemy per match
  ClassPair comment_rate{0.20, 0.50};
  double report_rate_shift = 0.0;           // added to both report rates (regional shift)

  ClassPair offender_message_rate{3.0, 5.0};  // Poisson mean of extra messages, one is always sent
  double other_message_rate = 4.0;            // per team, per match
  double bystander_valence = 6.0;

  double feeding_deaths_elevation = 5.0;  // extra Poisson deaths for toxic feeders
  ClassPair offender_win_rate{0.5, 0.4};

  std::uint64_t rng_seed = 42;

  /// Weak planted links and large low-agreement strata. Every effect is small
  /// enough that label noise limits what a classifier learns, so training on
  /// cleaner strata pays off.
  static GeneratorConfig low_signal();

  /// Throws std::invalid_argument on an invalid configuration.
  void validate() const;
  nlohmann::json to_json() const;
  /// Keys absent from `j` keep their defaults.
  static GeneratorConfig from_json(const nlohmann::json& j);
  bool operator==(const GeneratorConfig&) const = default;
};

class InfeasibleTarget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Offender valence targets for the latent classes in one agreement stratum.
struct LatentValence {
  ClassPair target{};  // [pardon, punish]
};

/// Latent targets per stratum: a common center C and a gap D scaled per
/// stratum by valence_gap_scale, placed so every stratum's latent mean is C.
/// C and D are the least-squares fit of the observed verdict means (pooled and
/// overwhelming-majority) to the configured ones. Label noise narrows the
/// observed gap further in low-agreement strata. Throws InfeasibleTarget when a target leaves the
/// range reachable with the lexicon.
std::array<LatentValence, 3> solve_latent_valence(const GeneratorConfig& config, const ValenceLexicon& lexicon);

/// Planted parameters of one generated case.
struct CaseTruth {
  std::string case_id;
  Decision latent = Decision::Pardon;
  Decision observed = Decision::Pardon;
  AgreementLevel agreement = AgreementLevel::Majority;
  bool flipped = false;
  ReportCategory primary_category = ReportCategory::VerbalAbuse;
  double valence_target = 0.0;
  double ally_report_rate = 0.0;
  double enemy_report_rate = 0.0;
  double comment_rate = 0.0;
  double offender_message_rate = 0.0;
  double deaths_elevation = 0.0;
  std::size_t matches = 0;
  std::size_t reports = 0;
  std::size_t offender_lexicon_tokens = 0;

  nlohmann::json to_json() const;
};

struct SyntheticCorpus {
  GeneratorConfig config;
  std::vector<Case> cases;
  std::vector<CaseTruth> truth;

  /// Feature name carrying the strongest planted effect.
  std::string dominant_feature() const;
  DatasetSummary expected_summary() const;
};

/// Case i draws from its own substream, so output does not depend on `threads`.
SyntheticCorpus generate_dataset(const GeneratorConfig& config, const ValenceLexicon& lexicon, unsigned threads = 1);

void write_ground_truth(std::ostream& out, std::span<const CaseTruth> truth);
void save_ground_truth(const std::filesystem::path& path, std::span<const CaseTruth> truth);

struct ValenceCell {
  Decision decision = Decision::Pardon;
  AgreementLevel agreement = AgreementLevel::Majority;
  std::size_t cases = 0;
  std::size_t scored = 0;  // cases whose offender valence is >= 1
  double mean = 0.0;
  std::array<double, 5> quantiles{};  // 10th, 25th, 50th, 75th, 90th percentiles
};

struct CalibrationSummary {
  std::vector<ValenceCell> cells;  // (decision, agreement) pairs
  double punished_mean = 0.0;
  double pardoned_mean = 0.0;
  double om_punished_mean = 0.0;
  double om_pardoned_mean = 0.0;
  /// Pearson correlation between a case's mean reports per match and its punish label.
  double report_label_correlation = 0.0;

  nlohmann::json to_json() const;
};

/// Offender valence is measured per case over all offender messages; cases
/// with no scored offender words are left out, as in a CDF over v >= 1.
CalibrationSummary corpus_report(std::span<const Case> cases, const ValenceLexicon& lexicon);

}  // namespace tribunal
