#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "footsim/errors.hpp"
#include "footsim/match_data.hpp"
#include "footsim/normal.hpp"

namespace footsim {

// Model input: the two teams' pre-match ratings.
struct FeatureRow {
  double elo_home = 0.0;
  double elo_away = 0.0;
};

enum class TargetKind { quantity, quality };

struct LinearModel {
  double intercept = 0.0;
  double coef_home = 0.0;
  double coef_away = 0.0;

  double predict(const FeatureRow& row) const {
    return intercept + coef_home * row.elo_home + coef_away * row.elo_away;
  }
};

// Memorized training set plus the feature standardization statistics used
// for distance computation.  Distances are Euclidean on standardized
// features; raw rating pairs would let whichever axis has the larger spread
// dominate.
struct NeighborModel {
  std::vector<FeatureRow> rows;
  std::vector<double> targets;
  std::size_t k = 1;
  double mean_home = 0.0, std_home = 1.0;
  double mean_away = 0.0, std_away = 1.0;
};

// Least squares on [1, elo_home, elo_away] via the normal equations, solved
// in centered form (a 2x2 system on mean-removed features) with long double
// accumulation.  Centering both conditions the system and makes the rank
// check exact: the design matrix is rank-deficient iff the centered feature
// Gram matrix is singular.
inline LinearModel fit_ols(const std::vector<FeatureRow>& features,
                           const std::vector<double>& targets) {
  const std::size_t n = features.size();
  if (n != targets.size())
    throw InternalError("feature/target length mismatch in least-squares fit");
  if (n < 3) throw InputError("degenerate features: need at least 3 rows");

  long double mean_h = 0.0L, mean_a = 0.0L, mean_y = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    mean_h += features[i].elo_home;
    mean_a += features[i].elo_away;
    mean_y += targets[i];
  }
  mean_h /= n;
  mean_a /= n;
  mean_y /= n;

  long double shh = 0.0L, saa = 0.0L, sha = 0.0L, shy = 0.0L, say = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const long double dh = features[i].elo_home - mean_h;
    const long double da = features[i].elo_away - mean_a;
    const long double dy = targets[i] - mean_y;
    shh += dh * dh;
    saa += da * da;
    sha += dh * da;
    shy += dh * dy;
    say += da * dy;
  }

  const long double det = shh * saa - sha * sha;
  if (shh == 0.0L || saa == 0.0L || det <= 1e-12L * shh * saa)
    throw InputError("degenerate features: rating columns are collinear or constant");

  LinearModel model;
  model.coef_home = static_cast<double>((saa * shy - sha * say) / det);
  model.coef_away = static_cast<double>((shh * say - sha * shy) / det);
  model.intercept = static_cast<double>(
      mean_y - model.coef_home * mean_h - model.coef_away * mean_a);
  return model;
}

// Mean-plus-spread forecaster for one target on one side.  The linear path
// carries an explicit spread model over absolute training residuals; the
// neighbor path derives spread from the neighbors themselves at query time.
struct DistributionForecaster {
  std::variant<LinearModel, NeighborModel> mean_model;
  std::optional<LinearModel> spread_model;
  // Absolute residuals estimate mean absolute deviation, which for normal
  // noise understates sigma by √(2/π); the fitted spread output is therefore
  // multiplied by this factor (1.0 when the rescale is switched off).
  double spread_scale = 1.0;
  TargetKind target_kind = TargetKind::quantity;
  Side side = Side::home;
};

using MeanFitter = LinearModel (*)(const std::vector<FeatureRow>&,
                                   const std::vector<double>&);

// Stage 1 fits the mean; stage 2 fits the same model family to the absolute
// residuals of stage 1 on its own training rows.
inline DistributionForecaster fit_two_stage(
    const std::vector<FeatureRow>& features, const std::vector<double>& targets,
    TargetKind target_kind, Side side, bool mad_rescale = true,
    MeanFitter mean_fitter = &fit_ols) {
  DistributionForecaster fc;
  fc.target_kind = target_kind;
  fc.side = side;
  const LinearModel mean = mean_fitter(features, targets);

  std::vector<double> abs_residuals(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i)
    abs_residuals[i] = std::abs(targets[i] - mean.predict(features[i]));

  fc.mean_model = mean;
  fc.spread_model = mean_fitter(features, abs_residuals);
  fc.spread_scale = mad_rescale ? std::sqrt(std::numbers::pi / 2.0) : 1.0;
  return fc;
}

inline DistributionForecaster fit_knn(const std::vector<FeatureRow>& features,
                                      const std::vector<double>& targets,
                                      std::size_t k, TargetKind target_kind,
                                      Side side) {
  if (features.size() != targets.size())
    throw InternalError("feature/target length mismatch in neighbor fit");
  if (k == 0 || k > features.size())
    throw InputError("neighbor count k=" + std::to_string(k) +
                     " exceeds available rows (" +
                     std::to_string(features.size()) + ")");

  NeighborModel nm;
  nm.rows = features;
  nm.targets = targets;
  nm.k = k;

  const std::size_t n = features.size();
  long double mh = 0.0L, ma = 0.0L;
  for (const FeatureRow& r : features) {
    mh += r.elo_home;
    ma += r.elo_away;
  }
  nm.mean_home = static_cast<double>(mh / n);
  nm.mean_away = static_cast<double>(ma / n);
  long double sh = 0.0L, sa = 0.0L;
  for (const FeatureRow& r : features) {
    sh += (r.elo_home - nm.mean_home) * (r.elo_home - nm.mean_home);
    sa += (r.elo_away - nm.mean_away) * (r.elo_away - nm.mean_away);
  }
  // Sample std; a spread-free column falls back to 1 so distances stay finite.
  nm.std_home = n > 1 ? std::sqrt(static_cast<double>(sh / (n - 1))) : 0.0;
  nm.std_away = n > 1 ? std::sqrt(static_cast<double>(sa / (n - 1))) : 0.0;
  if (nm.std_home == 0.0) nm.std_home = 1.0;
  if (nm.std_away == 0.0) nm.std_away = 1.0;

  DistributionForecaster fc;
  fc.mean_model = std::move(nm);
  fc.target_kind = target_kind;
  fc.side = side;
  return fc;
}

namespace detail {

// Mean and sample std over the k nearest stored rows.  Candidates are ordered
// by (distance, insertion index), so ties at the k-th distance resolve to the
// earliest-inserted rows and the selected set is deterministic everywhere.
inline NormalSpec knn_estimate(const NeighborModel& nm, const FeatureRow& row) {
  const double qh = (row.elo_home - nm.mean_home) / nm.std_home;
  const double qa = (row.elo_away - nm.mean_away) / nm.std_away;

  std::vector<std::pair<double, std::size_t>> candidates(nm.rows.size());
  for (std::size_t i = 0; i < nm.rows.size(); ++i) {
    const double dh = (nm.rows[i].elo_home - nm.mean_home) / nm.std_home - qh;
    const double da = (nm.rows[i].elo_away - nm.mean_away) / nm.std_away - qa;
    candidates[i] = {dh * dh + da * da, i};
  }
  std::nth_element(candidates.begin(), candidates.begin() + (nm.k - 1),
                   candidates.end());
  candidates.resize(nm.k);
  std::sort(candidates.begin(), candidates.end());

  long double mean = 0.0L;
  for (const auto& [dist, idx] : candidates) mean += nm.targets[idx];
  mean /= static_cast<long double>(nm.k);
  long double ss = 0.0L;
  for (const auto& [dist, idx] : candidates)
    ss += (nm.targets[idx] - mean) * (nm.targets[idx] - mean);
  const double std_dev =
      nm.k > 1 ? std::sqrt(static_cast<double>(ss / (nm.k - 1))) : 0.0;
  return {static_cast<double>(mean), std_dev};
}

}  // namespace detail

// Raw model output clamped into the target's legal range: quality means live
// in [0,1], quantity means at or above 0, spreads at or above 0.
inline NormalSpec forecast(const DistributionForecaster& fc, const FeatureRow& row) {
  NormalSpec out;
  if (const auto* lm = std::get_if<LinearModel>(&fc.mean_model)) {
    out.mean = lm->predict(row);
    out.std = fc.spread_model ? fc.spread_model->predict(row) * fc.spread_scale : 0.0;
  } else {
    out = detail::knn_estimate(std::get<NeighborModel>(fc.mean_model), row);
  }
  if (fc.target_kind == TargetKind::quality)
    out.mean = std::clamp(out.mean, 0.0, 1.0);
  else
    out.mean = std::max(out.mean, 0.0);
  out.std = std::max(out.std, 0.0);
  return out;
}

// --- persistence ------------------------------------------------------------
// JSON round-trip is exact: doubles serialize shortest-round-trip, so a
// loaded forecaster reproduces bit-identical forecasts.

inline nlohmann::json to_json(const LinearModel& lm) {
  return {{"intercept", lm.intercept},
          {"coef_home", lm.coef_home},
          {"coef_away", lm.coef_away}};
}

inline LinearModel linear_from_json(const nlohmann::json& j) {
  return {j.at("intercept").get<double>(), j.at("coef_home").get<double>(),
          j.at("coef_away").get<double>()};
}

inline nlohmann::json to_json(const DistributionForecaster& fc) {
  nlohmann::json j;
  j["target"] = fc.target_kind == TargetKind::quantity ? "quantity" : "quality";
  j["side"] = fc.side == Side::home ? "home" : "away";
  if (const auto* lm = std::get_if<LinearModel>(&fc.mean_model)) {
    j["kind"] = "linear";
    j["mean"] = to_json(*lm);
    if (fc.spread_model) j["spread"] = to_json(*fc.spread_model);
    j["spread_scale"] = fc.spread_scale;
  } else {
    const auto& nm = std::get<NeighborModel>(fc.mean_model);
    j["kind"] = "neighbor";
    j["k"] = nm.k;
    j["standardization"] = {{"mean_home", nm.mean_home},
                            {"std_home", nm.std_home},
                            {"mean_away", nm.mean_away},
                            {"std_away", nm.std_away}};
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < nm.rows.size(); ++i)
      rows.push_back({nm.rows[i].elo_home, nm.rows[i].elo_away, nm.targets[i]});
    j["rows"] = std::move(rows);
  }
  return j;
}

inline DistributionForecaster forecaster_from_json(const nlohmann::json& j) {
  DistributionForecaster fc;
  fc.target_kind = j.at("target").get<std::string>() == "quantity"
                       ? TargetKind::quantity
                       : TargetKind::quality;
  fc.side = j.at("side").get<std::string>() == "home" ? Side::home : Side::away;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    fc.mean_model = linear_from_json(j.at("mean"));
    if (j.contains("spread")) fc.spread_model = linear_from_json(j.at("spread"));
    fc.spread_scale = j.at("spread_scale").get<double>();
  } else if (kind == "neighbor") {
    NeighborModel nm;
    nm.k = j.at("k").get<std::size_t>();
    const auto& stats = j.at("standardization");
    nm.mean_home = stats.at("mean_home").get<double>();
    nm.std_home = stats.at("std_home").get<double>();
    nm.mean_away = stats.at("mean_away").get<double>();
    nm.std_away = stats.at("std_away").get<double>();
    for (const auto& row : j.at("rows")) {
      nm.rows.push_back({row.at(0).get<double>(), row.at(1).get<double>()});
      nm.targets.push_back(row.at(2).get<double>());
    }
    if (nm.k == 0 || nm.k > nm.rows.size())
      throw InputError("model file: neighbor count k is out of range");
    fc.mean_model = std::move(nm);
  } else {
    throw InputError("model file: unknown model kind '" + kind + "'");
  }
  return fc;
}

}  // namespace footsim
