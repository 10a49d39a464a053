#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "footsim/config.hpp"
#include "footsim/elo.hpp"
#include "footsim/errors.hpp"
#include "footsim/evaluation.hpp"
#include "footsim/match_data.hpp"
#include "footsim/models.hpp"
#include "footsim/rng.hpp"
#include "footsim/simulator.hpp"

namespace footsim {

// Fixture-level seed within one run: scrambled so that neighboring run seeds
// (derived as seed + run index) cannot collide with neighboring fixture
// indices.
inline std::uint64_t mix_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t state = root + (index + 1) * 0x9e3779b97f4a7c15ull;
  return splitmix64(state);
}

namespace detail {

inline const char* model_file_name(TargetKind kind, Side side) {
  if (side == Side::home)
    return kind == TargetKind::quantity ? "model_home_quantity.json"
                                        : "model_home_quality.json";
  return kind == TargetKind::quantity ? "model_away_quantity.json"
                                      : "model_away_quality.json";
}

inline DistributionForecaster fit_one(const RunConfig& cfg,
                                      const Dataset& train,
                                      const EloTimeline& timeline,
                                      TargetKind kind, Side side) {
  std::vector<FeatureRow> features;
  std::vector<double> targets;
  features.reserve(train.records.size());
  targets.reserve(train.records.size());
  for (std::size_t i = 0; i < train.records.size(); ++i) {
    const ShotTargets st = derive_targets(train.records[i], side);
    if (kind == TargetKind::quality && !st.quality_observed) continue;
    const MatchRatings& ratings = timeline.per_match[i];
    features.push_back({ratings.home_pre, ratings.away_pre});
    targets.push_back(kind == TargetKind::quantity
                          ? static_cast<double>(st.shots)
                          : st.quality);
  }
  if (cfg.model == "knn")
    return fit_knn(features, targets, cfg.knn_k, kind, side);
  return fit_two_stage(features, targets, kind, side, cfg.mad_rescale);
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path.string());
  out << content;
}

inline DistributionForecaster load_forecaster(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw InputError("missing model file " + path.string() +
                     " (run the train command first)");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("model file " + path.string() + ": " + e.what());
  }
  return forecaster_from_json(j);
}

inline ForecasterSet load_forecasters(const std::filesystem::path& dir) {
  ForecasterSet set;
  set.home_quantity =
      load_forecaster(dir / model_file_name(TargetKind::quantity, Side::home));
  set.home_quality =
      load_forecaster(dir / model_file_name(TargetKind::quality, Side::home));
  set.away_quantity =
      load_forecaster(dir / model_file_name(TargetKind::quantity, Side::away));
  set.away_quality =
      load_forecaster(dir / model_file_name(TargetKind::quality, Side::away));
  return set;
}

inline Dataset load_dataset(const RunConfig& cfg) {
  if (cfg.data.empty())
    throw InputError("no data file configured (config key 'data')");
  return load_csv(cfg.data, cfg.csv_options());
}

}  // namespace detail

// Ingest, replay ratings, fit the four shot forecasters on everything before
// the holdout tail, and persist models + rating timeline + a manifest tying
// the artifacts to the exact config and data bytes.
inline void cmd_train(const RunConfig& cfg, std::ostream& log) {
  const Dataset data = detail::load_dataset(cfg);
  const EloTimeline timeline = run_history(data, cfg.elo_params());
  const auto [train, holdout] = chronological_split(data, cfg.tail_n);

  const std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);

  for (const TargetKind kind : {TargetKind::quantity, TargetKind::quality})
    for (const Side side : {Side::home, Side::away}) {
      const DistributionForecaster fc =
          detail::fit_one(cfg, train, timeline, kind, side);
      detail::write_text_file(dir / detail::model_file_name(kind, side),
                              to_json(fc).dump(2) + "\n");
    }

  std::ostringstream timeline_csv;
  write_timeline_csv(timeline_csv, timeline);
  detail::write_text_file(dir / "timeline.csv", timeline_csv.str());

  nlohmann::json manifest;
  manifest["config_hash"] = hex64(cfg.hash());
  manifest["data_fingerprint"] = hex64(fingerprint_file(cfg.data));
  manifest["records"] = data.records.size();
  manifest["skipped_rows"] = data.skipped_rows;
  manifest["train_records"] = train.records.size();
  manifest["holdout_records"] = holdout.records.size();
  manifest["model"] = cfg.model;
  detail::write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

  log << "trained " << cfg.model << " forecasters on " << train.records.size()
      << " matches (" << holdout.records.size() << " held out, "
      << data.skipped_rows << " rows skipped); artifacts in " << dir.string()
      << "\n";
}

// Simulate one fixture between two known teams and print the market forecast
// as JSON.  Output is a pure function of (models, data, seed).
inline void cmd_forecast(const RunConfig& cfg, const std::string& home,
                         const std::string& away, std::ostream& out) {
  const Dataset data = detail::load_dataset(cfg);
  const EloTimeline timeline = run_history(data, cfg.elo_params());
  const ForecasterSet models = detail::load_forecasters(cfg.out);

  FixtureInput fx;
  fx.home_rating_dist = rating_distribution(timeline, home, cfg.window);
  fx.away_rating_dist = rating_distribution(timeline, away, cfg.window);
  fx.forecasters = &models;
  fx.n_simulations = cfg.n_simulations;
  fx.max_shots = cfg.max_shots;
  fx.seed = cfg.seed;
  fx.resample = cfg.resample_mode();
  fx.n_threads = cfg.threads;

  out << to_json(forecast_fixture(fx)).dump(2) << "\n";
}

namespace detail {

struct HoldoutRun {
  std::vector<ForecastEntry> entries;
  std::vector<OutcomeProbs> probs;
  std::vector<Outcome> outcomes;
  std::vector<std::pair<int, int>> actual_scores;
  std::vector<std::optional<OddsTriple>> odds;
};

// Forecast every holdout fixture with information available as of that
// fixture: rating windows stop at the fixture's own match index, and the
// models were fitted on pre-holdout rows only.
inline HoldoutRun run_holdout(const RunConfig& cfg, const Dataset& data,
                              const EloTimeline& timeline,
                              const ForecasterSet& models,
                              std::uint64_t run_seed) {
  HoldoutRun run;
  const std::size_t split = data.records.size() - cfg.tail_n;
  for (std::size_t j = 0; j < cfg.tail_n; ++j) {
    const std::size_t i = split + j;
    const MatchRecord& rec = data.records[i];

    FixtureInput fx;
    fx.home_rating_dist =
        rating_distribution_at(timeline, rec.home_team, i, cfg.window);
    fx.away_rating_dist =
        rating_distribution_at(timeline, rec.away_team, i, cfg.window);
    fx.forecasters = &models;
    fx.n_simulations = cfg.n_simulations;
    fx.max_shots = cfg.max_shots;
    fx.seed = mix_seed(run_seed, j);
    fx.resample = cfg.resample_mode();
    fx.n_threads = cfg.threads;

    const MarketForecast mf = forecast_fixture(fx);
    const OutcomeProbs probs{mf.p_home(), mf.p_draw(), mf.p_away()};
    run.entries.push_back(
        {probs, mf.mean_score, mf.median_score, mf.mode_score});
    run.probs.push_back(probs);
    run.outcomes.push_back(outcome_of(rec));
    run.actual_scores.emplace_back(rec.home_goals, rec.away_goals);
    if (rec.odds_home && rec.odds_draw && rec.odds_away)
      run.odds.emplace_back(OddsTriple{*rec.odds_home, *rec.odds_draw,
                                       *rec.odds_away});
    else
      run.odds.emplace_back(std::nullopt);
  }
  return run;
}

inline nlohmann::json point_metrics_json(const PointMetrics& m) {
  return {{"rmse", m.rmse}, {"mae", m.mae}};
}

inline nlohmann::json betting_json(const BetLedger& ledger) {
  nlohmann::json j;
  j["n_bets"] = ledger.bets.size();
  j["staked"] = ledger.staked;
  j["returned"] = ledger.returned;
  j["skipped_fixtures"] = ledger.skipped_fixtures;
  if (const auto r = ledger.rentability())
    j["rentability"] = *r;
  else
    j["rentability"] = nullptr;  // no bets placed
  return j;
}

}  // namespace detail

// Walk-forward evaluation on the holdout tail: forecast quality (RPS and the
// three point-score readings vs the constant 1-1 baseline), both taken
// against the bookmaker (margin and book RPS), plus the betting backtest.
// With runs > 1, run r re-simulates everything under seed + r and the report
// carries per-run and averaged values.
inline void cmd_evaluate(const RunConfig& cfg, std::size_t runs,
                         std::ostream& out, std::ostream& log) {
  if (runs == 0) throw InputError("runs must be at least 1");
  const Dataset data = detail::load_dataset(cfg);
  if (cfg.tail_n >= data.records.size())
    throw InputError("holdout size " + std::to_string(cfg.tail_n) +
                     " must be smaller than the dataset (" +
                     std::to_string(data.records.size()) + " records)");
  const EloTimeline timeline = run_history(data, cfg.elo_params());
  const ForecasterSet models = detail::load_forecasters(cfg.out);

  nlohmann::json report;
  report["n_holdout"] = cfg.tail_n;
  report["n_runs"] = runs;
  report["strategy"] = cfg.strategy;
  report["bet_scope"] = cfg.bet_scope;
  report["model"] = cfg.model;

  nlohmann::json run_array = nlohmann::json::array();
  double sum_rps = 0.0;
  PointMetrics sum_mean{}, sum_median{}, sum_mode{};
  double sum_rentability = 0.0;
  std::size_t runs_with_bets = 0;
  EvalReport first_report{};
  std::string ledger_csv;

  for (std::size_t r = 0; r < runs; ++r) {
    const std::uint64_t run_seed = cfg.seed + r;
    const detail::HoldoutRun run =
        detail::run_holdout(cfg, data, timeline, models, run_seed);
    const EvalReport eval = evaluate_forecasts(run.entries, run.actual_scores);
    const BetLedger ledger =
        backtest(run.probs, run.odds, run.outcomes, cfg.strategy, cfg.p_min,
                 cfg.bet_scope_mode());

    if (r == 0) {
      first_report = eval;
      std::ostringstream s;
      write_ledger_csv(s, ledger);
      ledger_csv = s.str();
    }

    nlohmann::json run_json;
    run_json["seed"] = run_seed;
    run_json["rps"] = eval.mean_rps;
    run_json["point_mean"] = detail::point_metrics_json(eval.mean_point);
    run_json["point_median"] = detail::point_metrics_json(eval.median_point);
    run_json["point_mode"] = detail::point_metrics_json(eval.mode_point);
    run_json["betting"] = detail::betting_json(ledger);
    run_array.push_back(std::move(run_json));

    sum_rps += eval.mean_rps;
    sum_mean.rmse += eval.mean_point.rmse;
    sum_mean.mae += eval.mean_point.mae;
    sum_median.rmse += eval.median_point.rmse;
    sum_median.mae += eval.median_point.mae;
    sum_mode.rmse += eval.mode_point.rmse;
    sum_mode.mae += eval.mode_point.mae;
    if (const auto rent = ledger.rentability()) {
      sum_rentability += *rent;
      ++runs_with_bets;
    }
  }
  report["runs"] = std::move(run_array);

  const double nr = static_cast<double>(runs);
  nlohmann::json average;
  average["rps"] = sum_rps / nr;
  average["point_mean"] = {{"rmse", sum_mean.rmse / nr}, {"mae", sum_mean.mae / nr}};
  average["point_median"] = {{"rmse", sum_median.rmse / nr},
                             {"mae", sum_median.mae / nr}};
  average["point_mode"] = {{"rmse", sum_mode.rmse / nr}, {"mae", sum_mode.mae / nr}};
  if (runs_with_bets > 0)
    average["rentability"] = sum_rentability / static_cast<double>(runs_with_bets);
  else
    average["rentability"] = nullptr;  // no bets in any run
  report["average"] = std::move(average);

  // Baseline depends only on the actual scores, so one copy serves all runs.
  report["baseline"] = detail::point_metrics_json(first_report.baseline);

  // Bookmaker reference: mean margin and mean RPS of overround-normalized
  // book probabilities, over the fixtures that carry a full odds triple.
  {
    const std::size_t split = data.records.size() - cfg.tail_n;
    double margin_sum = 0.0, book_rps_sum = 0.0;
    std::size_t with_odds = 0;
    for (std::size_t j = 0; j < cfg.tail_n; ++j) {
      const MatchRecord& rec = data.records[split + j];
      if (!(rec.odds_home && rec.odds_draw && rec.odds_away)) continue;
      const OddsTriple odds{*rec.odds_home, *rec.odds_draw, *rec.odds_away};
      margin_sum += bookmaker_margin(odds, cfg.margin_def_mode());
      book_rps_sum += rps(bookmaker_probs(odds), outcome_of(rec));
      ++with_odds;
    }
    nlohmann::json book;
    book["n_with_odds"] = with_odds;
    book["margin_def"] = cfg.margin_def;
    if (with_odds > 0) {
      book["margin"] = margin_sum / static_cast<double>(with_odds);
      book["rps"] = book_rps_sum / static_cast<double>(with_odds);
    } else {
      book["margin"] = nullptr;
      book["rps"] = nullptr;
    }
    report["bookmaker"] = std::move(book);
  }

  const std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  const std::string report_text = report.dump(2) + "\n";
  detail::write_text_file(dir / "report.json", report_text);
  detail::write_text_file(dir / "ledger.csv", ledger_csv);
  out << report_text;
  log << "evaluated " << cfg.tail_n << " holdout fixtures over " << runs
      << (runs == 1 ? " run" : " runs") << "; report in "
      << (dir / "report.json").string() << "\n";
}

// Scan draw multipliers over the config grid, write the (multiplier, mean
// RPS) curve, and print the minimizer.
inline void cmd_bias_scan(const RunConfig& cfg, std::ostream& out,
                          std::ostream& log) {
  const Dataset data = detail::load_dataset(cfg);
  if (cfg.tail_n >= data.records.size())
    throw InputError("holdout size " + std::to_string(cfg.tail_n) +
                     " must be smaller than the dataset (" +
                     std::to_string(data.records.size()) + " records)");
  const EloTimeline timeline = run_history(data, cfg.elo_params());
  const ForecasterSet models = detail::load_forecasters(cfg.out);

  const detail::HoldoutRun run =
      detail::run_holdout(cfg, data, timeline, models, cfg.seed);
  const BiasScanResult result =
      bias_scan(run.probs, run.outcomes, cfg.bias_grid_values());

  const std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  write_bias_scan_csv(csv, result);
  detail::write_text_file(dir / "bias_scan.csv", csv.str());

  out << "best_multiplier=" << detail::format_double(result.best_multiplier)
      << " mean_rps=" << detail::format_double(result.best_rps) << "\n";
  log << "scanned " << result.grid.size() << " multipliers; curve in "
      << (dir / "bias_scan.csv").string() << "\n";
}

}  // namespace footsim
