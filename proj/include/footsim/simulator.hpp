#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "footsim/errors.hpp"
#include "footsim/models.hpp"
#include "footsim/normal.hpp"
#include "footsim/rng.hpp"

namespace footsim {

struct ForecasterSet {
  DistributionForecaster home_quantity;
  DistributionForecaster home_quality;
  DistributionForecaster away_quantity;
  DistributionForecaster away_quality;
};

// Whether team ratings are redrawn for every simulation or once per fixture.
// Redrawing per simulation lets a volatile team occasionally outrate a
// steadier one, which is the point of carrying rating spread at all; the
// cheaper once-per-fixture variant collapses that.
enum class RatingResample { per_sim, once };

struct FixtureInput {
  NormalSpec home_rating_dist;
  NormalSpec away_rating_dist;
  const ForecasterSet* forecasters = nullptr;
  std::size_t n_simulations = 10000;
  int max_shots = 50;
  std::uint64_t seed = 0;
  RatingResample resample = RatingResample::per_sim;
  unsigned n_threads = 1;
};

struct SimulationResult {
  std::vector<int> home_goals;
  std::vector<int> away_goals;
  std::uint64_t seed = 0;
};

namespace detail {

inline int round_half_away(double x) {
  return static_cast<int>(x < 0 ? -std::llround(-x) : std::llround(x));
}

}  // namespace detail

// Per-shot scoring probabilities for one side in one simulation.  The full
// max_shots-wide row of quality samples is drawn first (each clamped to
// [0,1]), then the shot count, rounded half away from zero and clamped to
// [0, max_shots]; the first N entries are the active shots.
inline std::vector<double> sample_shot_vector(const NormalSpec& quality,
                                              const NormalSpec& quantity,
                                              int max_shots, Rng& rng) {
  std::vector<double> row(static_cast<std::size_t>(max_shots));
  for (double& s : row)
    s = std::clamp(rng.normal(quality.mean, quality.std), 0.0, 1.0);
  const int count = std::clamp(
      detail::round_half_away(rng.normal(quantity.mean, quantity.std)), 0,
      max_shots);
  row.resize(static_cast<std::size_t>(count));
  return row;
}

namespace detail {

inline int play_side(const NormalSpec& quality, const NormalSpec& quantity,
                     int max_shots, Rng& rng) {
  const std::vector<double> shots = sample_shot_vector(quality, quantity,
                                                       max_shots, rng);
  int goals = 0;
  for (double s : shots)
    if (rng.uniform01() < s) ++goals;
  return goals;
}

}  // namespace detail

// One fixture's Monte Carlo: per simulation, draw the two team ratings,
// forecast the four shot distributions at those ratings, and play out both
// sides shot by shot.  Simulation i consumes only its own child RNG stream,
// so any thread partition reproduces the sequential result bit for bit.
inline SimulationResult simulate(const FixtureInput& fx) {
  if (fx.forecasters == nullptr)
    throw InternalError("fixture has no forecasters attached");
  if (fx.n_simulations == 0)
    throw InputError("n_simulations must be at least 1");
  if (fx.max_shots < 1) throw InputError("max_shots must be at least 1");

  SimulationResult result;
  result.seed = fx.seed;
  result.home_goals.resize(fx.n_simulations);
  result.away_goals.resize(fx.n_simulations);

  // In once-per-fixture mode the ratings come from a dedicated fixture-level
  // stream far outside the per-simulation index range.
  ForecasterSet const& models = *fx.forecasters;
  FeatureRow fixed_features;
  if (fx.resample == RatingResample::once) {
    Rng fixture_rng = Rng::child(fx.seed, 0x8000000000000000ull);
    fixed_features.elo_home =
        fixture_rng.normal(fx.home_rating_dist.mean, fx.home_rating_dist.std);
    fixed_features.elo_away =
        fixture_rng.normal(fx.away_rating_dist.mean, fx.away_rating_dist.std);
  }

  const auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = Rng::child(fx.seed, i);
      FeatureRow features = fixed_features;
      if (fx.resample == RatingResample::per_sim) {
        features.elo_home =
            rng.normal(fx.home_rating_dist.mean, fx.home_rating_dist.std);
        features.elo_away =
            rng.normal(fx.away_rating_dist.mean, fx.away_rating_dist.std);
      }
      result.home_goals[i] =
          detail::play_side(forecast(models.home_quality, features),
                            forecast(models.home_quantity, features),
                            fx.max_shots, rng);
      result.away_goals[i] =
          detail::play_side(forecast(models.away_quality, features),
                            forecast(models.away_quantity, features),
                            fx.max_shots, rng);
    }
  };

  const unsigned threads = std::max(1u, fx.n_threads);
  if (threads == 1 || fx.n_simulations < 2 * threads) {
    run_range(0, fx.n_simulations);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (fx.n_simulations + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(begin + chunk, fx.n_simulations);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
    for (std::thread& th : pool) th.join();
  }
  return result;
}

struct MarketForecast {
  std::size_t n_simulations = 0;
  std::uint64_t seed = 0;

  // Counts are the canonical representation: the three outcome counts and the
  // score counts each partition the same n_simulations, so the probability
  // accessors below are frequencies over one common denominator and sum to
  // exactly 1 at the count level.
  std::size_t home_count = 0;
  std::size_t draw_count = 0;
  std::size_t away_count = 0;
  std::map<std::pair<int, int>, std::size_t> score_counts;
  std::map<int, std::size_t> total_counts;   // total goals per simulation
  std::map<int, std::size_t> margin_counts;  // home minus away goals

  std::pair<int, int> mean_score;
  std::pair<int, int> median_score;
  std::pair<int, int> mode_score;

  double p_home() const { return ratio(home_count); }
  double p_draw() const { return ratio(draw_count); }
  double p_away() const { return ratio(away_count); }

  std::map<std::pair<int, int>, double> score_distribution() const {
    std::map<std::pair<int, int>, double> dist;
    for (const auto& [score, count] : score_counts) dist[score] = ratio(count);
    return dist;
  }

  // Over-probabilities at the half-goal lines: line k+0.5 maps to
  // P(total goals > k).
  std::map<double, double> totals() const {
    std::map<double, double> over;
    if (total_counts.empty()) return over;
    const int max_total = total_counts.rbegin()->first;
    std::size_t above = n_simulations;
    for (int k = 0; k < max_total; ++k) {
      if (const auto it = total_counts.find(k); it != total_counts.end())
        above -= it->second;
      over[k + 0.5] = ratio(above);
    }
    return over;
  }

  std::map<int, double> margins() const {
    std::map<int, double> dist;
    for (const auto& [margin, count] : margin_counts) dist[margin] = ratio(count);
    return dist;
  }

 private:
  double ratio(std::size_t count) const {
    return static_cast<double>(count) / static_cast<double>(n_simulations);
  }
};

// Collapses simulated scorelines into market probabilities and the three
// point-score readings.  Mean and median goals round half away from zero;
// the mode breaks count ties toward the score with more total goals and then
// toward the lexicographically larger pair.
inline MarketForecast aggregate(const SimulationResult& res) {
  const std::size_t n = res.home_goals.size();
  if (n == 0 || res.away_goals.size() != n)
    throw InputError("cannot aggregate an empty or ragged simulation result");

  MarketForecast mf;
  mf.n_simulations = n;
  mf.seed = res.seed;

  long double sum_h = 0.0L, sum_a = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const int h = res.home_goals[i];
    const int a = res.away_goals[i];
    if (h > a) ++mf.home_count;
    else if (h == a) ++mf.draw_count;
    else ++mf.away_count;
    ++mf.score_counts[{h, a}];
    ++mf.total_counts[h + a];
    ++mf.margin_counts[h - a];
    sum_h += h;
    sum_a += a;
  }

  mf.mean_score = {detail::round_half_away(static_cast<double>(sum_h) / n),
                   detail::round_half_away(static_cast<double>(sum_a) / n)};

  const auto median = [n](std::vector<int> v) {
    std::nth_element(v.begin(), v.begin() + (n - 1) / 2, v.end());
    const int lo = v[(n - 1) / 2];
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    const int hi = v[n / 2];
    return detail::round_half_away((lo + hi) / 2.0);
  };
  mf.median_score = {median(res.home_goals), median(res.away_goals)};

  std::pair<int, int> best;
  std::size_t best_count = 0;
  int best_total = -1;
  for (const auto& [score, count] : mf.score_counts) {
    const int total = score.first + score.second;
    if (count > best_count || (count == best_count && total > best_total) ||
        (count == best_count && total == best_total && score > best)) {
      best = score;
      best_count = count;
      best_total = total;
    }
  }
  mf.mode_score = best;
  return mf;
}

inline MarketForecast forecast_fixture(const FixtureInput& fx) {
  return aggregate(simulate(fx));
}

// Diagnostic: chance that a goal count drawn from dist_a beats one drawn from
// dist_b, with both samples rounded to whole goals and floored at zero.
inline double win_probability_two_normals(const NormalSpec& dist_a,
                                          const NormalSpec& dist_b,
                                          std::size_t n_sims,
                                          std::uint64_t seed) {
  if (n_sims == 0) throw InputError("n_sims must be at least 1");
  Rng rng(seed);
  std::size_t wins = 0;
  for (std::size_t i = 0; i < n_sims; ++i) {
    const int a = std::max(0, detail::round_half_away(rng.normal(dist_a.mean, dist_a.std)));
    const int b = std::max(0, detail::round_half_away(rng.normal(dist_b.mean, dist_b.std)));
    if (a > b) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(n_sims);
}

inline nlohmann::json to_json(const MarketForecast& mf) {
  nlohmann::json j;
  j["p"] = {{"home", mf.p_home()}, {"draw", mf.p_draw()}, {"away", mf.p_away()}};
  nlohmann::json scores = nlohmann::json::array();
  for (const auto& [score, prob] : mf.score_distribution())
    scores.push_back({score.first, score.second, prob});
  j["scores"] = std::move(scores);
  j["point"] = {{"mean", {mf.mean_score.first, mf.mean_score.second}},
                {"median", {mf.median_score.first, mf.median_score.second}},
                {"mode", {mf.mode_score.first, mf.mode_score.second}}};
  j["n_simulations"] = mf.n_simulations;
  j["seed"] = mf.seed;
  return j;
}

}  // namespace footsim
