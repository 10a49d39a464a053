#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "footsim/errors.hpp"
#include "footsim/match_data.hpp"

namespace footsim {

enum class Outcome { home, draw, away };

inline Outcome outcome_of(const MatchRecord& rec) {
  if (rec.home_goals > rec.away_goals) return Outcome::home;
  if (rec.home_goals < rec.away_goals) return Outcome::away;
  return Outcome::draw;
}

struct OutcomeProbs {
  double p_home = 0.0;
  double p_draw = 0.0;
  double p_away = 0.0;
};

namespace detail {

inline void check_probs(const OutcomeProbs& p) {
  const double sum = p.p_home + p.p_draw + p.p_away;
  if (p.p_home < 0.0 || p.p_draw < 0.0 || p.p_away < 0.0 ||
      p.p_home > 1.0 || p.p_draw > 1.0 || p.p_away > 1.0 ||
      std::abs(sum - 1.0) > 1e-9)
    throw InternalError("outcome probabilities must lie in [0,1] and sum to 1");
}

}  // namespace detail

// Ranked probability score over the ordered outcomes (home, draw, away):
// half the sum of squared differences between the cumulative forecast and the
// cumulative actual indicator.  0 is a perfect forecast; a home-certain
// forecast scores 0.5 against a draw but 1.0 against an away win, which is
// the ordinal sensitivity that plain Brier-style scores lack.
inline double rps(const OutcomeProbs& probs, Outcome actual) {
  detail::check_probs(probs);
  const double c1 = probs.p_home;
  const double c2 = probs.p_home + probs.p_draw;
  const double o1 = actual == Outcome::home ? 1.0 : 0.0;
  const double o2 = actual == Outcome::away ? 0.0 : 1.0;
  return 0.5 * ((c1 - o1) * (c1 - o1) + (c2 - o2) * (c2 - o2));
}

struct ScoreErrors {
  double squared = 0.0;   // (dh)^2 + (da)^2
  double absolute = 0.0;  // |dh| + |da|
};

inline ScoreErrors score_errors(std::pair<int, int> pred,
                                std::pair<int, int> actual) {
  const double dh = pred.first - actual.first;
  const double da = pred.second - actual.second;
  return {dh * dh + da * da, std::abs(dh) + std::abs(da)};
}

struct ForecastEntry {
  OutcomeProbs probs;
  std::pair<int, int> mean_score;
  std::pair<int, int> median_score;
  std::pair<int, int> mode_score;
};

struct PointMetrics {
  double rmse = 0.0;
  double mae = 0.0;
};

struct EvalReport {
  std::size_t n_matches = 0;
  double mean_rps = 0.0;
  PointMetrics mean_point;    // scoreline from the per-side simulation mean
  PointMetrics median_point;  // ... from the per-side median
  PointMetrics mode_point;    // ... from the joint mode
  PointMetrics baseline;      // constant 1-1 forecast
};

// Scores a forecast set against actual scorelines: mean RPS over outcome
// probabilities, and RMSE/MAE of each point-score reading.  Per match the
// squared error is dh^2+da^2 and the absolute error |dh|+|da| (the two goal
// dimensions jointly), with RMSE = sqrt(mean squared) and MAE = mean absolute.
inline EvalReport evaluate_forecasts(const std::vector<ForecastEntry>& forecasts,
                                     const std::vector<std::pair<int, int>>& actuals) {
  if (forecasts.size() != actuals.size())
    throw InputError("forecast/actual length mismatch");
  if (forecasts.empty()) throw InputError("nothing to evaluate");

  EvalReport report;
  report.n_matches = forecasts.size();
  double sum_rps = 0.0;
  double sq_mean = 0.0, ab_mean = 0.0;
  double sq_median = 0.0, ab_median = 0.0;
  double sq_mode = 0.0, ab_mode = 0.0;
  double sq_base = 0.0, ab_base = 0.0;

  for (std::size_t i = 0; i < forecasts.size(); ++i) {
    const auto actual_outcome =
        actuals[i].first > actuals[i].second   ? Outcome::home
        : actuals[i].first < actuals[i].second ? Outcome::away
                                               : Outcome::draw;
    sum_rps += rps(forecasts[i].probs, actual_outcome);

    const ScoreErrors e_mean = score_errors(forecasts[i].mean_score, actuals[i]);
    const ScoreErrors e_median = score_errors(forecasts[i].median_score, actuals[i]);
    const ScoreErrors e_mode = score_errors(forecasts[i].mode_score, actuals[i]);
    const ScoreErrors e_base = score_errors({1, 1}, actuals[i]);
    sq_mean += e_mean.squared;
    ab_mean += e_mean.absolute;
    sq_median += e_median.squared;
    ab_median += e_median.absolute;
    sq_mode += e_mode.squared;
    ab_mode += e_mode.absolute;
    sq_base += e_base.squared;
    ab_base += e_base.absolute;
  }

  const double n = static_cast<double>(report.n_matches);
  report.mean_rps = sum_rps / n;
  report.mean_point = {std::sqrt(sq_mean / n), ab_mean / n};
  report.median_point = {std::sqrt(sq_median / n), ab_median / n};
  report.mode_point = {std::sqrt(sq_mode / n), ab_mode / n};
  report.baseline = {std::sqrt(sq_base / n), ab_base / n};
  return report;
}

// Odds implied by a forecast probability.  Probabilities below the floor are
// clamped first; Monte Carlo frequencies can be exactly 0, and infinite odds
// would make every book price look like value.
inline double fair_odds(double p, double p_min = 0.001) {
  return 1.0 / std::max(p, p_min);
}

struct OddsTriple {
  double home = 0.0;
  double draw = 0.0;
  double away = 0.0;

  double of(Outcome market) const {
    switch (market) {
      case Outcome::home: return home;
      case Outcome::draw: return draw;
      default: return away;
    }
  }
};

struct Bet {
  std::size_t fixture = 0;
  Outcome market = Outcome::home;
  double stake = 0.0;
  double odds = 0.0;
  bool won = false;
};

struct BetLedger {
  std::vector<Bet> bets;
  double staked = 0.0;
  double returned = 0.0;
  std::size_t skipped_fixtures = 0;  // fixtures without a full odds triple

  // Undefined (no value) when nothing was staked.
  std::optional<double> rentability() const {
    if (staked <= 0.0) return std::nullopt;
    return (returned - staked) / staked;
  }
};

// Which markets of one fixture to consider for betting: every market whose
// book odds clear our fair odds, or only the single best of them (highest
// expected return, ties to the earlier market in home/draw/away order).
enum class BetScope { per_market, best_market };

// Value betting against the book: bet a market when the offered odds are
// strictly higher than our fair odds.  Strategy 1 stakes one unit; strategy 2
// stakes the inverse of our fair odds (the forecast probability), risking
// less on long shots.
inline BetLedger backtest(const std::vector<OutcomeProbs>& model_probs,
                          const std::vector<std::optional<OddsTriple>>& book_odds,
                          const std::vector<Outcome>& results, int strategy,
                          double p_min = 0.001,
                          BetScope scope = BetScope::per_market) {
  if (model_probs.size() != book_odds.size() ||
      model_probs.size() != results.size())
    throw InputError("backtest input lengths differ");
  if (strategy != 1 && strategy != 2)
    throw InputError("strategy must be 1 or 2");

  BetLedger ledger;
  for (std::size_t i = 0; i < model_probs.size(); ++i) {
    if (!book_odds[i]) {
      ++ledger.skipped_fixtures;
      continue;
    }
    const OddsTriple& book = *book_odds[i];
    const double model_p[3] = {model_probs[i].p_home, model_probs[i].p_draw,
                               model_probs[i].p_away};
    const Outcome markets[3] = {Outcome::home, Outcome::draw, Outcome::away};

    std::vector<Outcome> chosen;
    if (scope == BetScope::per_market) {
      for (int m = 0; m < 3; ++m)
        if (book.of(markets[m]) > fair_odds(model_p[m], p_min))
          chosen.push_back(markets[m]);
    } else {
      double best_value = 0.0;
      for (int m = 0; m < 3; ++m) {
        if (book.of(markets[m]) <= fair_odds(model_p[m], p_min)) continue;
        const double value = book.of(markets[m]) * std::max(model_p[m], p_min);
        if (chosen.empty() || value > best_value) {
          chosen.assign(1, markets[m]);
          best_value = value;
        }
      }
    }

    for (Outcome market : chosen) {
      const double p = model_p[market == Outcome::home   ? 0
                               : market == Outcome::draw ? 1
                                                         : 2];
      Bet bet;
      bet.fixture = i;
      bet.market = market;
      bet.stake = strategy == 1 ? 1.0 : 1.0 / fair_odds(p, p_min);
      bet.odds = book.of(market);
      bet.won = results[i] == market;
      ledger.staked += bet.stake;
      if (bet.won) ledger.returned += bet.stake * bet.odds;
      ledger.bets.push_back(bet);
    }
  }
  return ledger;
}

inline const char* market_name(Outcome market) {
  switch (market) {
    case Outcome::home: return "home";
    case Outcome::draw: return "draw";
    default: return "away";
  }
}

inline void write_ledger_csv(std::ostream& out, const BetLedger& ledger) {
  out << "fixture,market,stake,odds,won,pnl\n";
  for (const Bet& bet : ledger.bets) {
    const double pnl = bet.won ? bet.stake * (bet.odds - 1.0) : -bet.stake;
    out << bet.fixture << ',' << market_name(bet.market) << ','
        << detail::format_double(bet.stake) << ','
        << detail::format_double(bet.odds) << ',' << (bet.won ? 1 : 0) << ','
        << detail::format_double(pnl) << '\n';
  }
}

// The two readings of a book's take given the overround R = sum of inverse
// odds: the expected return of proportional blind betting (1/R - 1, negative
// on a real book) or the raw overround excess (R - 1).
enum class MarginDef { inverse_overround, overround };

inline double bookmaker_margin(const OddsTriple& odds,
                               MarginDef def = MarginDef::inverse_overround) {
  const double r = 1.0 / odds.home + 1.0 / odds.draw + 1.0 / odds.away;
  return def == MarginDef::inverse_overround ? 1.0 / r - 1.0 : r - 1.0;
}

// Book odds as probabilities, overround normalized away.
inline OutcomeProbs bookmaker_probs(const OddsTriple& odds) {
  const double r = 1.0 / odds.home + 1.0 / odds.draw + 1.0 / odds.away;
  return {1.0 / (odds.home * r), 1.0 / (odds.draw * r), 1.0 / (odds.away * r)};
}

// Scales the draw probability and renormalizes.  The home:away ratio is
// untouched, so this shifts mass between "draw" and "decided" only.
inline OutcomeProbs adjust_draw(const OutcomeProbs& probs, double multiplier) {
  if (multiplier <= 0.0) throw InputError("draw multiplier must be positive");
  const double d = probs.p_draw * multiplier;
  const double sum = probs.p_home + d + probs.p_away;
  return {probs.p_home / sum, d / sum, probs.p_away / sum};
}

struct BiasScanResult {
  std::vector<std::pair<double, double>> grid;  // (multiplier, mean RPS)
  double best_multiplier = 1.0;
  double best_rps = 0.0;
};

// Mean RPS as a function of the draw multiplier, minimized over the given
// grid.  Equal scores tie-break toward the multiplier closest to 1.0 (then
// the smaller one), so an entirely flat curve reports "no adjustment".
inline BiasScanResult bias_scan(const std::vector<OutcomeProbs>& forecasts,
                                const std::vector<Outcome>& actuals,
                                const std::vector<double>& grid) {
  if (forecasts.size() != actuals.size())
    throw InputError("forecast/actual length mismatch");
  if (forecasts.empty()) throw InputError("nothing to evaluate");
  if (grid.empty()) throw InputError("empty multiplier grid");

  BiasScanResult result;
  bool first = true;
  for (double multiplier : grid) {
    double sum = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i)
      sum += rps(adjust_draw(forecasts[i], multiplier), actuals[i]);
    const double mean_rps = sum / static_cast<double>(forecasts.size());
    result.grid.emplace_back(multiplier, mean_rps);

    const auto closer_to_one = [&] {
      const double d_new = std::abs(multiplier - 1.0);
      const double d_best = std::abs(result.best_multiplier - 1.0);
      return d_new < d_best ||
             (d_new == d_best && multiplier < result.best_multiplier);
    };
    if (first || mean_rps < result.best_rps ||
        (mean_rps == result.best_rps && closer_to_one())) {
      result.best_multiplier = multiplier;
      result.best_rps = mean_rps;
      first = false;
    }
  }
  return result;
}

inline void write_bias_scan_csv(std::ostream& out, const BiasScanResult& result) {
  out << "multiplier,mean_rps\n";
  for (const auto& [multiplier, mean_rps] : result.grid)
    out << detail::format_double(multiplier) << ','
        << detail::format_double(mean_rps) << '\n';
}

}  // namespace footsim
