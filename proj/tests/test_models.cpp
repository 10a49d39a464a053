#include "footsim/models.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "footsim/errors.hpp"
#include "footsim/rng.hpp"

using namespace footsim;

namespace {

// Feature grid of rating pairs roughly where fitted ratings live.
std::vector<FeatureRow> random_features(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FeatureRow> rows(n);
  for (FeatureRow& row : rows) {
    row.elo_home = 300 + 600 * rng.uniform01();
    row.elo_away = 300 + 600 * rng.uniform01();
  }
  return rows;
}

std::vector<double> apply(const std::vector<FeatureRow>& rows,
                          double intercept, double ch, double ca) {
  std::vector<double> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    y[i] = intercept + ch * rows[i].elo_home + ca * rows[i].elo_away;
  return y;
}

}  // namespace

TEST(FitOls, RecoversNoiselessCoefficients) {
  const auto rows = random_features(50, 1);
  const auto y = apply(rows, 2.0, 0.01, -0.005);
  const LinearModel model = fit_ols(rows, y);
  EXPECT_NEAR(model.intercept, 2.0, 1e-9);
  EXPECT_NEAR(model.coef_home, 0.01, 1e-9);
  EXPECT_NEAR(model.coef_away, -0.005, 1e-9);
}

TEST(FitOls, ConstantTargetIsPureIntercept) {
  const auto rows = random_features(40, 2);
  const LinearModel model = fit_ols(rows, std::vector<double>(40, 7.0));
  EXPECT_NEAR(model.intercept, 7.0, 1e-9);
  EXPECT_NEAR(model.coef_home, 0.0, 1e-9);
  EXPECT_NEAR(model.coef_away, 0.0, 1e-9);
}

TEST(FitOls, IdenticalFeatureRowsAreDegenerate) {
  const std::vector<FeatureRow> rows(10, {500, 500});
  EXPECT_THROW(fit_ols(rows, std::vector<double>(10, 1.0)), InputError);
}

TEST(FitOls, CollinearFeaturesAreDegenerate) {
  std::vector<FeatureRow> rows;
  for (int i = 0; i < 20; ++i)
    rows.push_back({400.0 + i, 410.0 + i});  // away = home + 10 exactly
  EXPECT_THROW(fit_ols(rows, std::vector<double>(20, 1.0)), InputError);
}

TEST(FitOls, ConstantSingleColumnIsDegenerate) {
  std::vector<FeatureRow> rows;
  for (int i = 0; i < 20; ++i) rows.push_back({500.0, 300.0 + i});
  EXPECT_THROW(fit_ols(rows, std::vector<double>(20, 1.0)), InputError);
}

TEST(FitOls, FewerThanThreeRowsIsDegenerate) {
  EXPECT_THROW(fit_ols({{1, 2}, {3, 4}}, {1.0, 2.0}), InputError);
}

TEST(FitOls, ResidualsOrthogonalToFeatures) {
  const auto rows = random_features(500, 3);
  Rng rng(4);
  std::vector<double> y(rows.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = 10 + 0.02 * rows[i].elo_home + rng.normal(0, 3);
  const LinearModel model = fit_ols(rows, y);

  double dot1 = 0, doth = 0, dota = 0, scale = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - model.predict(rows[i]);
    dot1 += r;
    doth += r * rows[i].elo_home;
    dota += r * rows[i].elo_away;
    scale += std::abs(y[i]) * rows[i].elo_home;
  }
  EXPECT_NEAR(dot1 / y.size(), 0.0, 1e-9);
  EXPECT_LE(std::abs(doth), 1e-6 * scale);
  EXPECT_LE(std::abs(dota), 1e-6 * scale);
}

TEST(FitTwoStage, NoiselessTargetsHaveNoSpread) {
  const auto rows = random_features(100, 5);
  const auto y = apply(rows, 1.0, 0.003, -0.001);
  const DistributionForecaster fc =
      fit_two_stage(rows, y, TargetKind::quantity, Side::home);
  for (const FeatureRow& probe : random_features(20, 6))
    EXPECT_NEAR(forecast(fc, probe).std, 0.0, 1e-6);
}

TEST(FitTwoStage, HomoscedasticNoiseRecoversSigma) {
  const auto rows = random_features(10000, 7);
  Rng rng(8);
  std::vector<double> y(rows.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = 12 + 0.01 * rows[i].elo_home - 0.004 * rows[i].elo_away +
           rng.normal(0, 2.0);
  const DistributionForecaster fc =
      fit_two_stage(rows, y, TargetKind::quantity, Side::home);
  for (double h = 300; h <= 900; h += 150)
    for (double a = 300; a <= 900; a += 150) {
      const NormalSpec spec = forecast(fc, {h, a});
      EXPECT_GE(spec.std, 1.8) << "at (" << h << ", " << a << ")";
      EXPECT_LE(spec.std, 2.2) << "at (" << h << ", " << a << ")";
    }
}

TEST(FitTwoStage, HeteroscedasticNoiseGrowsAlongItsDriver) {
  const auto rows = random_features(20000, 9);
  Rng rng(10);
  std::vector<double> y(rows.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double sigma = 0.004 * rows[i].elo_home;  // 1.2 .. 3.6
    y[i] = 5 + 0.01 * rows[i].elo_home + rng.normal(0, sigma);
  }
  const DistributionForecaster fc =
      fit_two_stage(rows, y, TargetKind::quantity, Side::home);
  double previous = -1.0;
  for (double h = 350; h <= 850; h += 125) {
    const double predicted = forecast(fc, {h, 600}).std;
    EXPECT_GT(predicted, previous);
    previous = predicted;
  }
}

TEST(FitTwoStage, MadRescaleSwitchScalesSpread) {
  const auto rows = random_features(2000, 11);
  Rng rng(12);
  std::vector<double> y(rows.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 3 + rng.normal(0, 1.5);
  const DistributionForecaster on =
      fit_two_stage(rows, y, TargetKind::quantity, Side::home, true);
  const DistributionForecaster off =
      fit_two_stage(rows, y, TargetKind::quantity, Side::home, false);
  const FeatureRow probe{500, 500};
  EXPECT_NEAR(forecast(on, probe).std,
              forecast(off, probe).std * std::sqrt(std::numbers::pi / 2.0),
              1e-12);
}

TEST(FitKnn, SingleNeighborAtTrainingPoint) {
  const DistributionForecaster fc =
      fit_knn({{500, 500}, {600, 400}, {400, 600}}, {3.0, 9.0, 1.0}, 1,
              TargetKind::quantity, Side::home);
  const NormalSpec spec = forecast(fc, {600, 400});
  EXPECT_DOUBLE_EQ(spec.mean, 9.0);
  EXPECT_DOUBLE_EQ(spec.std, 0.0);
}

TEST(FitKnn, ThreeNeighborsMeanAndSampleStd) {
  const DistributionForecaster fc =
      fit_knn({{450, 550}, {550, 450}, {500, 500}}, {10.0, 12.0, 14.0}, 3,
              TargetKind::quantity, Side::home);
  const NormalSpec spec = forecast(fc, {500, 500});
  EXPECT_DOUBLE_EQ(spec.mean, 12.0);
  EXPECT_DOUBLE_EQ(spec.std, 2.0);  // sqrt((4 + 0 + 4) / 2)
}

TEST(FitKnn, KLargerThanRowsIsError) {
  EXPECT_THROW(fit_knn({{1, 2}, {3, 4}, {5, 6}, {7, 8}},
                       {1.0, 2.0, 3.0, 4.0}, 5, TargetKind::quantity,
                       Side::home),
               InputError);
  EXPECT_THROW(fit_knn({{1, 2}}, {1.0}, 0, TargetKind::quantity, Side::home),
               InputError);
}

TEST(FitKnn, KEqualsNReproducesGlobalStatistics) {
  Rng rng(13);
  std::vector<FeatureRow> rows;
  std::vector<double> targets;
  for (int i = 0; i < 50; ++i) {
    rows.push_back({300 + 600 * rng.uniform01(), 300 + 600 * rng.uniform01()});
    targets.push_back(5 + 10 * rng.uniform01());
  }
  double mean = 0;
  for (double t : targets) mean += t;
  mean /= targets.size();
  double ss = 0;
  for (double t : targets) ss += (t - mean) * (t - mean);
  const double global_std = std::sqrt(ss / (targets.size() - 1));

  const DistributionForecaster fc =
      fit_knn(rows, targets, rows.size(), TargetKind::quantity, Side::home);
  for (const FeatureRow& probe :
       {FeatureRow{100, 100}, FeatureRow{500, 500}, FeatureRow{950, 200}}) {
    const NormalSpec spec = forecast(fc, probe);
    EXPECT_NEAR(spec.mean, mean, 1e-9);
    EXPECT_NEAR(spec.std, global_std, 1e-9);
  }
}

TEST(FitKnn, TiesBreakByInsertionOrder) {
  // Three identical rows: any k selects the first k inserted.
  const std::vector<FeatureRow> rows(3, {500, 500});
  const DistributionForecaster k1 =
      fit_knn(rows, {4.0, 8.0, 12.0}, 1, TargetKind::quantity, Side::home);
  EXPECT_DOUBLE_EQ(forecast(k1, {500, 500}).mean, 4.0);
  const DistributionForecaster k2 =
      fit_knn(rows, {4.0, 8.0, 12.0}, 2, TargetKind::quantity, Side::home);
  EXPECT_DOUBLE_EQ(forecast(k2, {500, 500}).mean, 6.0);  // first two only
}

TEST(FitKnn, DistancesAreStandardized) {
  // Home ratings {0, 4} (std 2*sqrt(2)); away column is constant, so its
  // spread falls back to 1 and contributes nothing.  The query at home=3 is
  // closer to the second row in standardized space.
  const DistributionForecaster fc = fit_knn(
      {{0, 100}, {4, 100}}, {5.0, 7.0}, 1, TargetKind::quantity, Side::home);
  EXPECT_DOUBLE_EQ(forecast(fc, {3, 100}).mean, 7.0);
  EXPECT_DOUBLE_EQ(forecast(fc, {1, 100}).mean, 5.0);
}

TEST(Forecast, QualityMeanClampsToUnitInterval) {
  DistributionForecaster fc;
  fc.target_kind = TargetKind::quality;
  fc.mean_model = LinearModel{1.3, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(forecast(fc, {500, 500}).mean, 1.0);
  fc.mean_model = LinearModel{-0.4, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(forecast(fc, {500, 500}).mean, 0.0);
}

TEST(Forecast, QuantityMeanClampsToNonNegative) {
  DistributionForecaster fc;
  fc.target_kind = TargetKind::quantity;
  fc.mean_model = LinearModel{-2.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(forecast(fc, {500, 500}).mean, 0.0);
}

TEST(Forecast, SpreadClampsToNonNegative) {
  DistributionForecaster fc;
  fc.target_kind = TargetKind::quantity;
  fc.mean_model = LinearModel{5.0, 0.0, 0.0};
  fc.spread_model = LinearModel{-3.0, 0.0, 0.0};
  fc.spread_scale = 1.25;
  EXPECT_DOUBLE_EQ(forecast(fc, {500, 500}).std, 0.0);
}

TEST(Forecast, ClampsHoldUnderAdversarialModels) {
  Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    DistributionForecaster fc;
    fc.target_kind = trial % 2 == 0 ? TargetKind::quantity : TargetKind::quality;
    fc.mean_model = LinearModel{rng.normal(0, 50), rng.normal(0, 1),
                                rng.normal(0, 1)};
    fc.spread_model = LinearModel{rng.normal(0, 20), rng.normal(0, 0.5),
                                  rng.normal(0, 0.5)};
    fc.spread_scale = 1.2533141373155003;
    const NormalSpec spec =
        forecast(fc, {300 + 600 * rng.uniform01(), 300 + 600 * rng.uniform01()});
    ASSERT_GE(spec.std, 0.0);
    ASSERT_GE(spec.mean, 0.0);
    if (fc.target_kind == TargetKind::quality) ASSERT_LE(spec.mean, 1.0);
  }
}

TEST(PredictionSurface, OlsIsAffineOnAGrid) {
  const auto rows = random_features(200, 15);
  Rng rng(16);
  std::vector<double> y(rows.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = 8 + 0.01 * rows[i].elo_home - 0.003 * rows[i].elo_away +
           rng.normal(0, 1);
  const DistributionForecaster fc =
      fit_two_stage(rows, y, TargetKind::quantity, Side::home);

  // Second differences of an affine surface vanish along both axes.
  const double step = 25.0;
  for (int gi = 0; gi < 18; ++gi)
    for (int gj = 0; gj < 18; ++gj) {
      const double h = 350 + gi * step, a = 350 + gj * step;
      const double center = forecast(fc, {h, a}).mean;
      const double east = forecast(fc, {h + step, a}).mean;
      const double east2 = forecast(fc, {h + 2 * step, a}).mean;
      const double north = forecast(fc, {h, a + step}).mean;
      const double north2 = forecast(fc, {h, a + 2 * step}).mean;
      ASSERT_NEAR(east2 - 2 * east + center, 0.0, 1e-9);
      ASSERT_NEAR(north2 - 2 * north + center, 0.0, 1e-9);
    }
}

TEST(PredictionSurface, KnnIsPiecewiseConstant) {
  Rng rng(17);
  std::vector<FeatureRow> rows;
  std::vector<double> targets;
  for (int i = 0; i < 60; ++i) {
    rows.push_back({300 + 600 * rng.uniform01(), 300 + 600 * rng.uniform01()});
    targets.push_back(rng.normal(10, 3));
  }
  const DistributionForecaster fc =
      fit_knn(rows, targets, 7, TargetKind::quantity, Side::home);

  std::set<double> distinct;
  for (int gi = 0; gi < 20; ++gi)
    for (int gj = 0; gj < 20; ++gj) {
      const FeatureRow q{320 + gi * 28.0, 320 + gj * 28.0};
      const double value = forecast(fc, q).mean;
      distinct.insert(value);
      // Locally constant: a tiny nudge cannot move the prediction.
      ASSERT_EQ(forecast(fc, {q.elo_home + 1e-7, q.elo_away - 1e-7}).mean, value);
    }
  // Far fewer plateaus than queries: the surface is steps, not a gradient.
  EXPECT_LT(distinct.size(), 400u);
}

TEST(PredictionSurface, KnnMatchesBruteForceSelection) {
  Rng rng(18);
  std::vector<FeatureRow> rows;
  std::vector<double> targets;
  for (int i = 0; i < 40; ++i) {
    rows.push_back({300 + 600 * rng.uniform01(), 300 + 600 * rng.uniform01()});
    targets.push_back(rng.normal(10, 3));
  }
  const std::size_t k = 5;
  const DistributionForecaster fc =
      fit_knn(rows, targets, k, TargetKind::quantity, Side::home);
  const auto& nm = std::get<NeighborModel>(fc.mean_model);

  for (int trial = 0; trial < 50; ++trial) {
    const FeatureRow q{300 + 600 * rng.uniform01(), 300 + 600 * rng.uniform01()};
    // Independent selection: stable sort by distance keeps insertion order.
    std::vector<std::pair<double, std::size_t>> by_dist;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double dh = (rows[i].elo_home - nm.mean_home) / nm.std_home -
                        (q.elo_home - nm.mean_home) / nm.std_home;
      const double da = (rows[i].elo_away - nm.mean_away) / nm.std_away -
                        (q.elo_away - nm.mean_away) / nm.std_away;
      by_dist.emplace_back(dh * dh + da * da, i);
    }
    std::stable_sort(by_dist.begin(), by_dist.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    double mean = 0;
    for (std::size_t i = 0; i < k; ++i) mean += targets[by_dist[i].second];
    mean /= k;
    EXPECT_NEAR(forecast(fc, q).mean, mean, 1e-12);
  }
}

TEST(Persistence, LinearRoundTripIsBitIdentical) {
  const auto rows = random_features(500, 19);
  Rng rng(20);
  std::vector<double> y(rows.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = 9 + 0.007 * rows[i].elo_home + rng.normal(0, 2);
  const DistributionForecaster fc =
      fit_two_stage(rows, y, TargetKind::quantity, Side::home);

  const DistributionForecaster loaded =
      forecaster_from_json(nlohmann::json::parse(to_json(fc).dump()));
  for (const FeatureRow& probe : random_features(50, 21)) {
    const NormalSpec a = forecast(fc, probe);
    const NormalSpec b = forecast(loaded, probe);
    ASSERT_EQ(a.mean, b.mean);
    ASSERT_EQ(a.std, b.std);
  }
}

TEST(Persistence, NeighborRoundTripIsBitIdentical) {
  const auto rows = random_features(100, 22);
  Rng rng(23);
  std::vector<double> targets(rows.size());
  for (double& t : targets) t = rng.normal(0.1, 0.02);
  const DistributionForecaster fc =
      fit_knn(rows, targets, 9, TargetKind::quality, Side::away);

  const DistributionForecaster loaded =
      forecaster_from_json(nlohmann::json::parse(to_json(fc).dump()));
  EXPECT_EQ(loaded.target_kind, TargetKind::quality);
  EXPECT_EQ(loaded.side, Side::away);
  for (const FeatureRow& probe : random_features(50, 24)) {
    const NormalSpec a = forecast(fc, probe);
    const NormalSpec b = forecast(loaded, probe);
    ASSERT_EQ(a.mean, b.mean);
    ASSERT_EQ(a.std, b.std);
  }
}

TEST(Persistence, RejectsMalformedModels) {
  EXPECT_THROW(forecaster_from_json(nlohmann::json::parse(
                   R"({"kind":"magic","target":"quantity","side":"home"})")),
               InputError);
  EXPECT_THROW(
      forecaster_from_json(nlohmann::json::parse(
          R"({"kind":"neighbor","target":"quantity","side":"home",
              "k":3,"standardization":{"mean_home":0,"std_home":1,
              "mean_away":0,"std_away":1},"rows":[[1,2,3]]})")),
      InputError);
}
