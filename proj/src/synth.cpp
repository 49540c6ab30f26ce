#include "tribunal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <thread>

#include "tribunal/features.hpp"
#include "tribunal/rng.hpp"

namespace tribunal {

namespace {

using nlohmann::json;

constexpr std::string_view kFillerWords[] = {"mid",  "top",   "bot",   "jungle", "ff",    "omw", "lane",
                                             "drag", "baron", "gank",  "push",   "b",     "ult", "flash",
                                             "tower", "inhib", "jg",   "supp",   "adc",   "cs"};

constexpr std::string_view kCommentTemplates[] = {
    "flamed the whole team all game",
    "kept dying on purpose",
    "told us to uninstall",
    "spammed pings and chat nonstop",
    "insulted everyone after first blood",
    "ran it down mid after losing lane",
    "refused to stop arguing with jungle",
    "typed slurs in all chat",
};

// Words of the lexicon split at a target valence: drawing from the high pool
// with probability q makes the expected token valence equal the target.
class WordMixture {
 public:
  WordMixture(const ValenceLexicon& lexicon, double target) : target_(target) {
    for (const auto& [word, score] : lexicon.entries()) (score <= target ? low_ : high_).push_back({word, score});
    if (low_.empty() || high_.empty())
      throw InfeasibleTarget("valence target " + std::to_string(target) + " outside the lexicon's score range [" +
                             std::to_string(lexicon.min_score()) + ", " + std::to_string(lexicon.max_score()) + "]");
    const double mu_low = mean(low_), mu_high = mean(high_);
    q_high_ = (target - mu_low) / (mu_high - mu_low);
    if (!(q_high_ >= 0.0 && q_high_ <= 1.0))
      throw InfeasibleTarget("valence target " + std::to_string(target) + " not reachable by the word mixture");
  }

  const std::string& draw(Rng& rng) const {
    const auto& pool = rng.bernoulli(q_high_) ? high_ : low_;
    return pool[rng.below(pool.size())].first;
  }
  double target() const { return target_; }

 private:
  static double mean(const std::vector<std::pair<std::string, double>>& pool) {
    double s = 0.0;
    for (const auto& [_, v] : pool) s += v;
    return s / static_cast<double>(pool.size());
  }

  double target_;
  double q_high_ = 0.0;
  std::vector<std::pair<std::string, double>> low_, high_;
};

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

std::size_t cls(Decision d) { return d == Decision::Punish ? 1 : 0; }

std::array<double, 3> array_from_json(const json& j, const char* key, std::array<double, 3> fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 3) throw std::invalid_argument(std::string(key) + ": expected 3 values");
  return {v[0], v[1], v[2]};
}

ClassPair pair_from_json(const json& j, const char* key, ClassPair fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 2) throw std::invalid_argument(std::string(key) + ": expected [pardoned, punished]");
  return {v[0], v[1]};
}

struct Generator {
  const GeneratorConfig& config;
  const ValenceLexicon& lexicon;
  std::array<LatentValence, 3> latent_targets;
  std::vector<std::array<WordMixture, 2>> offender_words;  // [agreement][class]
  WordMixture bystander_words;
  std::vector<std::string> filler;

  Generator(const GeneratorConfig& c, const ValenceLexicon& lex)
      : config(c),
        lexicon(lex),
        latent_targets(solve_latent_valence(c, lex)),
        bystander_words(lex, c.bystander_valence) {
    for (const LatentValence& lt : latent_targets)
      offender_words.push_back({WordMixture(lex, lt.target[0]), WordMixture(lex, lt.target[1])});
    for (std::string_view w : kFillerWords)
      if (!lex.lookup(w)) filler.emplace_back(w);
  }

  std::string message(Rng& rng, const WordMixture& words, std::size_t& lexicon_tokens) const {
    std::vector<std::string> tokens;
    const auto n_words = static_cast<std::size_t>(rng.between(1, 3));
    for (std::size_t i = 0; i < n_words; ++i) {
      std::string w = words.draw(rng);
      if (rng.bernoulli(0.15)) std::transform(w.begin(), w.end(), w.begin(), [](unsigned char ch) { return std::toupper(ch); });
      tokens.push_back(std::move(w));
    }
    lexicon_tokens += n_words;
    if (!filler.empty()) {
      const auto n_filler = static_cast<std::size_t>(rng.between(0, 2));
      for (std::size_t i = 0; i < n_filler; ++i) tokens.push_back(filler[rng.below(filler.size())]);
    }
    rng.shuffle(std::span<std::string>(tokens));
    std::string text;
    for (const std::string& t : tokens) text += (text.empty() ? "" : " ") + t;
    if (rng.bernoulli(0.3)) text += rng.bernoulli(0.5) ? "!" : "?";
    return text;
  }

  PlayerStats player(Rng& rng, PlayerRole role, double duration) const {
    const double minutes = duration / 60.0;
    PlayerStats p;
    p.role = role;
    p.kills = rng.poisson(5.5);
    p.deaths = rng.poisson(5.5);
    p.assists = rng.poisson(8.0);
    p.damage_dealt = std::round(std::max(0.0, rng.normal(420.0, 110.0)) * minutes);
    p.damage_received = std::round(std::max(0.0, rng.normal(480.0, 110.0)) * minutes);
    p.gold_earned = std::round(std::max(80.0, rng.normal(340.0, 45.0)) * minutes);
    p.time_played = rng.bernoulli(0.03) ? std::round(duration * rng.uniform(0.3, 0.9)) : duration;
    return p;
  }

  std::pair<Case, CaseTruth> make_case(std::size_t index) const {
    Rng rng(derive_seed(config.rng_seed, index));
    CaseTruth truth;
    truth.latent = rng.bernoulli(config.punish_rate) ? Decision::Punish : Decision::Pardon;
    truth.agreement = kAllAgreementLevels[rng.categorical(config.agreement_mix)];
    const std::size_t stratum = static_cast<std::size_t>(truth.agreement);
    truth.flipped = rng.bernoulli(config.flip_probability[stratum]);
    truth.observed = truth.flipped ? (truth.latent == Decision::Punish ? Decision::Pardon : Decision::Punish)
                                   : truth.latent;
    truth.primary_category = kAllReportCategories[rng.categorical(config.category_mix)];

    const std::size_t k = cls(truth.latent);
    truth.ally_report_rate = clamp01(config.ally_report_rate[k] + config.report_rate_shift);
    truth.enemy_report_rate = clamp01(config.enemy_report_rate[k] + config.report_rate_shift);
    truth.comment_rate = config.comment_rate[k];
    truth.offender_message_rate = config.offender_message_rate[k];
    truth.deaths_elevation =
        (k == 1 && truth.primary_category == ReportCategory::IntentionalFeeding) ? config.feeding_deaths_elevation : 0.0;
    const WordMixture& offender_mix = offender_words[stratum][k];
    truth.valence_target = offender_mix.target();

    char id[64];
    std::snprintf(id, sizeof id, "%s-%llu-%06zu", std::string(to_string(config.region)).c_str(),
                  static_cast<unsigned long long>(config.rng_seed), index);
    truth.case_id = id;

    Case c;
    c.case_id = truth.case_id;
    c.region = config.region;
    c.decision = truth.observed;
    c.agreement = truth.agreement;
    const auto n_matches = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(kMaxMatchesPerCase)));
    for (std::size_t mi = 0; mi < n_matches; ++mi) {
      Match m;
      m.duration = std::round(rng.uniform(1500.0, 2700.0));
      m.offender_won = rng.bernoulli(config.offender_win_rate[k]);

      PlayerStats offender = player(rng, PlayerRole::Offender, m.duration);
      if (truth.deaths_elevation > 0.0) {
        offender.deaths += rng.poisson(truth.deaths_elevation);
        offender.damage_dealt = std::round(offender.damage_dealt * 0.6);
      }
      m.players.push_back(offender);
      for (std::size_t i = 0; i < kAlliesPerMatch; ++i) m.players.push_back(player(rng, PlayerRole::Ally, m.duration));
      for (std::size_t i = 0; i < kEnemiesPerMatch; ++i) m.players.push_back(player(rng, PlayerRole::Enemy, m.duration));

      std::vector<ReportSource> sources;
      for (std::size_t i = 0; i < kAlliesPerMatch; ++i)
        if (rng.bernoulli(truth.ally_report_rate)) sources.push_back(ReportSource::Ally);
      for (std::size_t i = 0; i < kEnemiesPerMatch; ++i)
        if (rng.bernoulli(truth.enemy_report_rate)) sources.push_back(ReportSource::Enemy);
      // The match is in the case because someone reported it.
      if (sources.empty()) sources.push_back(rng.bernoulli(0.5) ? ReportSource::Ally : ReportSource::Enemy);
      for (ReportSource source : sources) {
        Report r;
        r.source = source;
        r.category = truth.primary_category;
        if (!rng.bernoulli(config.category_purity)) {
          const std::size_t other = rng.below(kNumReportCategories - 1);
          r.category = kAllReportCategories[other >= index_of(truth.primary_category) ? other + 1 : other];
        }
        if (rng.bernoulli(truth.comment_rate))
          r.comment = std::string(kCommentTemplates[rng.below(std::size(kCommentTemplates))]);
        m.reports.push_back(std::move(r));
      }

      std::vector<PlayerRole> speakers(1 + static_cast<std::size_t>(rng.poisson(truth.offender_message_rate)),
                                       PlayerRole::Offender);
      speakers.insert(speakers.end(), static_cast<std::size_t>(rng.poisson(config.other_message_rate)), PlayerRole::Ally);
      speakers.insert(speakers.end(), static_cast<std::size_t>(rng.poisson(config.other_message_rate)), PlayerRole::Enemy);
      rng.shuffle(std::span<PlayerRole>(speakers));
      std::size_t bystander_tokens = 0;
      for (PlayerRole role : speakers) {
        if (role == PlayerRole::Offender)
          m.chat.push_back({role, message(rng, offender_mix, truth.offender_lexicon_tokens)});
        else
          m.chat.push_back({role, message(rng, bystander_words, bystander_tokens)});
      }
      truth.reports += m.reports.size();
      c.matches.push_back(std::move(m));
    }
    truth.matches = n_matches;
    return {std::move(c), std::move(truth)};
  }
};

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

void GeneratorConfig::validate() const {
  auto probability = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
  };
  if (!(punish_rate > 0.0 && punish_rate < 1.0)) throw std::invalid_argument("punish_rate must be in (0, 1)");
  double mix = 0.0;
  for (double p : agreement_mix) {
    probability(p, "agreement_mix");
    mix += p;
  }
  if (std::abs(mix - 1.0) > 1e-9) throw std::invalid_argument("agreement_mix must sum to 1");
  for (double p : flip_probability) {
    probability(p, "flip_probability");
    if (p >= 0.5) throw std::invalid_argument("flip_probability must be < 0.5");
  }
  for (double g : valence_gap_scale)
    if (!(g >= 0.0 && std::isfinite(g))) throw std::invalid_argument("valence_gap_scale must be >= 0");
  double cats = 0.0;
  for (double p : category_mix) {
    probability(p, "category_mix");
    cats += p;
  }
  if (!(cats > 0.0)) throw std::invalid_argument("category_mix needs a positive weight");
  probability(category_purity, "category_purity");
  for (const ClassPair* pair : {&ally_report_rate, &enemy_report_rate, &comment_rate, &offender_win_rate})
    for (double p : *pair) probability(p, "rate");
  for (double r : offender_message_rate)
    if (!(r >= 0.0)) throw std::invalid_argument("offender_message_rate must be >= 0");
  if (!(other_message_rate >= 0.0)) throw std::invalid_argument("other_message_rate must be >= 0");
  if (!(feeding_deaths_elevation >= 0.0)) throw std::invalid_argument("feeding_deaths_elevation must be >= 0");
  const ValenceTargets& t = valence_targets;
  if (!(t.punished_mean <= t.pardoned_mean) || !(t.om_punished_mean <= t.om_pardoned_mean))
    throw std::invalid_argument("valence_targets: punished means must not exceed pardoned means");
}

GeneratorConfig GeneratorConfig::low_signal() {
  GeneratorConfig c;
  c.agreement_mix = {0.4, 0.2, 0.4};
  c.ally_report_rate = {0.25, 0.36};
  c.enemy_report_rate = {0.15, 0.20};
  c.comment_rate = {0.30, 0.36};
  c.offender_message_rate = {4.0, 4.6};
  c.feeding_deaths_elevation = 2.0;
  return c;
}

json GeneratorConfig::to_json() const {
  return {{"n_cases", n_cases},
          {"region", to_string(region)},
          {"punish_rate", punish_rate},
          {"agreement_mix", agreement_mix},
          {"flip_probability", flip_probability},
          {"valence_gap_scale", valence_gap_scale},
          {"valence_targets",
           {{"punished_mean", valence_targets.punished_mean},
            {"pardoned_mean", valence_targets.pardoned_mean},
            {"om_punished_mean", valence_targets.om_punished_mean},
            {"om_pardoned_mean", valence_targets.om_pardoned_mean}}},
          {"category_mix", category_mix},
          {"category_purity", category_purity},
          {"ally_report_rate", ally_report_rate},
          {"enemy_report_rate", enemy_report_rate},
          {"comment_rate", comment_rate},
          {"report_rate_shift", report_rate_shift},
          {"offender_message_rate", offender_message_rate},
          {"other_message_rate", other_message_rate},
          {"bystander_valence", bystander_valence},
          {"feeding_deaths_elevation", feeding_deaths_elevation},
          {"offender_win_rate", offender_win_rate},
          {"rng_seed", rng_seed}};
}

GeneratorConfig GeneratorConfig::from_json(const json& j) {
  GeneratorConfig c;
  if (j.contains("n_cases")) c.n_cases = j.at("n_cases").get<std::size_t>();
  if (j.contains("region")) {
    const auto r = parse_region(j.at("region").get<std::string>());
    if (!r) throw std::invalid_argument("region: unknown value");
    c.region = *r;
  }
  if (j.contains("punish_rate")) c.punish_rate = j.at("punish_rate").get<double>();
  c.agreement_mix = array_from_json(j, "agreement_mix", c.agreement_mix);
  c.flip_probability = array_from_json(j, "flip_probability", c.flip_probability);
  c.valence_gap_scale = array_from_json(j, "valence_gap_scale", c.valence_gap_scale);
  if (j.contains("valence_targets")) {
    const json& t = j.at("valence_targets");
    c.valence_targets.punished_mean = t.value("punished_mean", c.valence_targets.punished_mean);
    c.valence_targets.pardoned_mean = t.value("pardoned_mean", c.valence_targets.pardoned_mean);
    c.valence_targets.om_punished_mean = t.value("om_punished_mean", c.valence_targets.om_punished_mean);
    c.valence_targets.om_pardoned_mean = t.value("om_pardoned_mean", c.valence_targets.om_pardoned_mean);
  }
  if (j.contains("category_mix")) {
    const auto v = j.at("category_mix").get<std::vector<double>>();
    if (v.size() != kNumReportCategories) throw std::invalid_argument("category_mix: expected 7 values");
    std::copy(v.begin(), v.end(), c.category_mix.begin());
  }
  c.category_purity = j.value("category_purity", c.category_purity);
  c.ally_report_rate = pair_from_json(j, "ally_report_rate", c.ally_report_rate);
  c.enemy_report_rate = pair_from_json(j, "enemy_report_rate", c.enemy_report_rate);
  c.comment_rate = pair_from_json(j, "comment_rate", c.comment_rate);
  c.report_rate_shift = j.value("report_rate_shift", c.report_rate_shift);
  c.offender_message_rate = pair_from_json(j, "offender_message_rate", c.offender_message_rate);
  c.other_message_rate = j.value("other_message_rate", c.other_message_rate);
  c.bystander_valence = j.value("bystander_valence", c.bystander_valence);
  c.feeding_deaths_elevation = j.value("feeding_deaths_elevation", c.feeding_deaths_elevation);
  c.offender_win_rate = pair_from_json(j, "offender_win_rate", c.offender_win_rate);
  if (j.contains("rng_seed")) c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  return c;
}

std::array<LatentValence, 3> solve_latent_valence(const GeneratorConfig& config, const ValenceLexicon& lexicon) {
  // Stratum a has latent pardon/punish targets C - s_a*D*pi and
  // C + s_a*D*(1 - pi). A verdict group's observed mean is then
  // C + s_a*D*(c - pi), c being the share of latent-toxic cases in the group.
  const double pi = config.punish_rate;
  const auto& scale = config.valence_gap_scale;
  std::array<double, 3> punish_coef{}, pardon_coef{}, punish_mass{}, pardon_mass{};
  for (std::size_t a = 0; a < 3; ++a) {
    const double f = config.flip_probability[a];
    const double observed_punish = (1.0 - f) * pi + f * (1.0 - pi);
    punish_coef[a] = scale[a] * ((1.0 - f) * pi / observed_punish - pi);
    pardon_coef[a] = scale[a] * (f * pi / (1.0 - observed_punish) - pi);
    punish_mass[a] = config.agreement_mix[a] * observed_punish;
    pardon_mass[a] = config.agreement_mix[a] * (1.0 - observed_punish);
  }
  auto pooled = [](const std::array<double, 3>& coef, const std::array<double, 3>& mass) {
    const double total = mass[0] + mass[1] + mass[2];
    return total > 0.0 ? (coef[0] * mass[0] + coef[1] * mass[1] + coef[2] * mass[2]) / total : coef[2];
  };
  const ValenceTargets& t = config.valence_targets;
  const std::array<std::pair<double, double>, 4> rows{{
      {pooled(punish_coef, punish_mass), t.punished_mean},
      {pooled(pardon_coef, pardon_mass), t.pardoned_mean},
      {punish_coef[2], t.om_punished_mean},
      {pardon_coef[2], t.om_pardoned_mean},
  }};
  double sc = 0.0, scc = 0.0, sy = 0.0, scy = 0.0;
  for (const auto& [c, y] : rows) {
    sc += c;
    scc += c * c;
    sy += y;
    scy += c * y;
  }
  const double n = static_cast<double>(rows.size());
  const double denom = n * scc - sc * sc;
  const double gap = denom > 0.0 ? (n * scy - sc * sy) / denom : 0.0;
  const double center = (sy - gap * sc) / n;

  std::array<LatentValence, 3> out{};
  for (std::size_t a = 0; a < 3; ++a) {
    out[a].target = {center - scale[a] * gap * pi, center + scale[a] * gap * (1.0 - pi)};
    for (double v : out[a].target) {
      if (!(v > lexicon.min_score() && v < lexicon.max_score()))
        throw InfeasibleTarget("latent valence target " + std::to_string(v) + " for " +
                               std::string(to_string(kAllAgreementLevels[a])) + " outside the lexicon range (" +
                               std::to_string(lexicon.min_score()) + ", " + std::to_string(lexicon.max_score()) + ")");
    }
  }
  return out;
}

json CaseTruth::to_json() const {
  return {{"case_id", case_id},
          {"latent_decision", to_string(latent)},
          {"decision", to_string(observed)},
          {"agreement", to_string(agreement)},
          {"flipped", flipped},
          {"primary_category", to_string(primary_category)},
          {"valence_target", valence_target},
          {"ally_report_rate", ally_report_rate},
          {"enemy_report_rate", enemy_report_rate},
          {"comment_rate", comment_rate},
          {"offender_message_rate", offender_message_rate},
          {"deaths_elevation", deaths_elevation},
          {"matches", matches},
          {"reports", reports},
          {"offender_lexicon_tokens", offender_lexicon_tokens}};
}

std::string SyntheticCorpus::dominant_feature() const {
  // Standardized per-match difference of each planted effect, weighted by
  // the share of cases whose features carry it.
  const GeneratorConfig& c = config;
  const std::size_t top = static_cast<std::size_t>(
      std::max_element(c.category_mix.begin(), c.category_mix.end()) - c.category_mix.begin());
  const double total_mix = std::accumulate(c.category_mix.begin(), c.category_mix.end(), 0.0);
  const double top_share = c.category_mix[top] / total_mix;
  const double feeding_share = c.category_mix[index_of(ReportCategory::IntentionalFeeding)] / total_mix;

  auto binomial_effect = [&](const ClassPair& rate, double players) {
    const double r0 = clamp01(rate[0] + c.report_rate_shift), r1 = clamp01(rate[1] + c.report_rate_shift);
    const double mean_rate = (r0 + r1) / 2.0;
    const double sd = std::sqrt(players * mean_rate * (1.0 - mean_rate));
    return sd > 0.0 ? players * std::abs(r1 - r0) / sd : 0.0;
  };
  const double lambda = (c.offender_message_rate[0] + c.offender_message_rate[1]) / 2.0;
  struct Effect {
    double size;
    std::string feature;
  };
  const std::string prefix(feature_prefix(kAllReportCategories[top]));
  const std::array<Effect, 4> effects{{
      {top_share * binomial_effect(c.ally_report_rate, kAlliesPerMatch), prefix + ".allied.report.count"},
      {top_share * binomial_effect(c.enemy_report_rate, kEnemiesPerMatch), prefix + ".enemy.report.count"},
      {top_share * std::abs(c.offender_message_rate[1] - c.offender_message_rate[0]) / std::sqrt(lambda + 1.0),
       prefix + ".offender.chat.msgs"},
      {feeding_share * c.feeding_deaths_elevation / std::sqrt(5.5 + c.feeding_deaths_elevation),
       "intentionally.feeding.offender.deaths"},
  }};
  const auto best = std::max_element(effects.begin(), effects.end(),
                                     [](const Effect& a, const Effect& b) { return a.size < b.size; });
  return best->feature;
}

DatasetSummary SyntheticCorpus::expected_summary() const {
  DatasetSummary s;
  for (const CaseTruth& t : truth) {
    RegionTally& tally = s.by_region[static_cast<std::size_t>(config.region)];
    ++tally.cases;
    tally.matches += t.matches;
    tally.reports += t.reports;
  }
  return s;
}

SyntheticCorpus generate_dataset(const GeneratorConfig& config, const ValenceLexicon& lexicon, unsigned threads) {
  config.validate();
  const Generator gen(config, lexicon);
  SyntheticCorpus corpus;
  corpus.config = config;
  corpus.cases.resize(config.n_cases);
  corpus.truth.resize(config.n_cases);
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < config.n_cases; i += step) {
      auto [c, t] = gen.make_case(i);
      corpus.cases[i] = std::move(c);
      corpus.truth[i] = std::move(t);
    }
  };
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w, threads);
    for (auto& t : pool) t.join();
  }
  return corpus;
}

void write_ground_truth(std::ostream& out, std::span<const CaseTruth> truth) {
  for (const CaseTruth& t : truth) out << t.to_json().dump() << '\n';
}

void save_ground_truth(const std::filesystem::path& path, std::span<const CaseTruth> truth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError(0, "", "cannot write " + path.string());
  write_ground_truth(out, truth);
}

json CalibrationSummary::to_json() const {
  json jc = json::array();
  for (const ValenceCell& c : cells)
    jc.push_back({{"decision", to_string(c.decision)},
                  {"agreement", to_string(c.agreement)},
                  {"cases", c.cases},
                  {"scored", c.scored},
                  {"mean", c.mean},
                  {"quantiles", {{"p10", c.quantiles[0]},
                                 {"p25", c.quantiles[1]},
                                 {"p50", c.quantiles[2]},
                                 {"p75", c.quantiles[3]},
                                 {"p90", c.quantiles[4]}}}});
  return {{"cells", jc},
          {"punished_mean", punished_mean},
          {"pardoned_mean", pardoned_mean},
          {"om_punished_mean", om_punished_mean},
          {"om_pardoned_mean", om_pardoned_mean},
          {"report_label_correlation", report_label_correlation}};
}

CalibrationSummary corpus_report(std::span<const Case> cases, const ValenceLexicon& lexicon) {
  if (cases.empty()) throw ContractError("corpus_report: empty corpus");
  CalibrationSummary s;
  std::array<std::array<std::vector<double>, 3>, 2> valences;  // [punish?][agreement]
  std::array<std::array<std::size_t, 3>, 2> counts{};
  std::vector<double> report_rate, punished;
  for (const Case& c : cases) {
    ValenceAccumulator acc(lexicon);
    std::size_t reports = 0;
    for (const Match& m : c.matches) {
      reports += m.reports.size();
      for (const ChatMessage& msg : m.chat)
        if (msg.speaker_role == PlayerRole::Offender) acc.add_text(msg.text);
    }
    const std::size_t d = cls(c.decision), a = static_cast<std::size_t>(c.agreement);
    ++counts[d][a];
    if (const double v = acc.value(); v >= kMinValence) valences[d][a].push_back(v);
    report_rate.push_back(static_cast<double>(reports) / static_cast<double>(std::max<std::size_t>(c.matches.size(), 1)));
    punished.push_back(static_cast<double>(d));
  }

  for (Decision dec : {Decision::Punish, Decision::Pardon}) {
    for (AgreementLevel ag : kAllAgreementLevels) {
      const std::size_t d = cls(dec), a = static_cast<std::size_t>(ag);
      std::vector<double> sorted = valences[d][a];
      std::sort(sorted.begin(), sorted.end());
      ValenceCell cell{dec, ag, counts[d][a], sorted.size(), mean(sorted), {}};
      const std::array<double, 5> qs{0.1, 0.25, 0.5, 0.75, 0.9};
      for (std::size_t i = 0; i < qs.size(); ++i) cell.quantiles[i] = quantile(sorted, qs[i]);
      s.cells.push_back(cell);
    }
  }
  auto pooled = [&](std::size_t d) {
    std::vector<double> all;
    for (const auto& v : valences[d]) all.insert(all.end(), v.begin(), v.end());
    return mean(all);
  };
  s.punished_mean = pooled(1);
  s.pardoned_mean = pooled(0);
  s.om_punished_mean = mean(valences[1][2]);
  s.om_pardoned_mean = mean(valences[0][2]);

  const double mx = mean(report_rate), my = mean(punished);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < report_rate.size(); ++i) {
    sxy += (report_rate[i] - mx) * (punished[i] - my);
    sxx += (report_rate[i] - mx) * (report_rate[i] - mx);
    syy += (punished[i] - my) * (punished[i] - my);
  }
  s.report_label_correlation = (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
  return s;
}

}  // namespace tribunal
