#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tsadbench/primitives/ar.hpp"
#include "tsadbench/rng.hpp"

using namespace tsadbench;

namespace {

std::vector<double> generate_ar1(double phi, double intercept, double x0, std::size_t length) {
  std::vector<double> x = {x0};
  while (x.size() < length) x.push_back(intercept + phi * x.back());
  return x;
}

TEST(ArFit, RecoversNoiselessAr1) {
  // x_t = 0.8 x_{t-1} + 1, started away from the fixed point so the lag
  // matrix keeps full rank
  const auto series = generate_ar1(0.8, 1.0, 50.0, 60);
  const ArModel model = ar_fit(series, 1, 0);
  EXPECT_NEAR(model.coefficients(0), 0.8, 1e-6);
  EXPECT_NEAR(model.intercept, 1.0, 1e-6);

  // cross-check against a plain normal-equations solve
  std::vector<std::vector<double>> design;
  std::vector<double> target;
  for (std::size_t t = 1; t < series.size(); ++t) {
    design.push_back({1.0, series[t - 1]});
    target.push_back(series[t]);
  }
  const auto beta = oracles::normal_equations_solve(design, target);
  EXPECT_NEAR(model.intercept, beta[0], 1e-8);
  EXPECT_NEAR(model.coefficients(0), beta[1], 1e-8);
}

TEST(ArFit, RecoversNoiselessAr2) {
  const double phi1 = 0.6;
  const double phi2 = -0.3;
  const double intercept = 0.5;
  std::vector<double> x = {1.0, -2.0};
  while (x.size() < 200)
    x.push_back(intercept + phi1 * x[x.size() - 1] + phi2 * x[x.size() - 2]);
  const ArModel model = ar_fit(x, 2, 0);
  EXPECT_NEAR(model.coefficients(0), phi1, 1e-6);
  EXPECT_NEAR(model.coefficients(1), phi2, 1e-6);
  EXPECT_NEAR(model.intercept, intercept, 1e-6);
}

TEST(ArFit, NoisyRecoveryStaysClose) {
  Rng rng(42);
  const double phi1 = 0.6;
  const double phi2 = -0.3;
  std::vector<double> x = {0.0, 0.0};
  while (x.size() < 2000)
    x.push_back(phi1 * x[x.size() - 1] + phi2 * x[x.size() - 2] + rng.normal(0.0, 0.01));
  const ArModel model = ar_fit(x, 2, 0);
  EXPECT_NEAR(model.coefficients(0), phi1, 0.05);
  EXPECT_NEAR(model.coefficients(1), phi2, 0.05);
}

TEST(ArFit, ConstantSeriesDifferencedOnceGivesZeroCoefficient) {
  const std::vector<double> series(40, 3.5);
  const ArModel model = ar_fit(series, 1, 1);
  EXPECT_NEAR(model.coefficients(0), 0.0, 1e-12);
  EXPECT_NEAR(model.intercept, 0.0, 1e-12);
}

TEST(ArFit, TooShortSeriesIsRejected) {
  try {
    ar_fit({1.0, 2.0, 3.0}, 3, 0);
    FAIL() << "expected SeriesTooShort";
  } catch (const BenchError& e) {
    EXPECT_EQ(e.code(), ErrorCode::SeriesTooShort);
  }
}

TEST(ArPredict, PlugsInLastValue) {
  ArModel model;
  model.p = 1;
  model.d = 0;
  model.intercept = 1.0;
  model.coefficients = Eigen::VectorXd::Constant(1, 0.8);
  const ArForecast forecast = ar_predict(model, {4.0, 7.0, 10.0});
  ASSERT_EQ(forecast.predictions.size(), 2u);
  EXPECT_DOUBLE_EQ(forecast.predictions[0], 1.0 + 0.8 * 4.0);
  EXPECT_DOUBLE_EQ(forecast.predictions[1], 1.0 + 0.8 * 7.0);
  // one-step continuation from a last value of 10
  EXPECT_DOUBLE_EQ(1.0 + 0.8 * 10.0, 9.0);
}

TEST(ArPredict, ZeroDifferenceModelForecastsPreviousValue) {
  ArModel model;
  model.p = 1;
  model.d = 1;
  model.intercept = 0.0;
  model.coefficients = Eigen::VectorXd::Zero(1);
  const std::vector<double> series = {5.0, 9.0, 2.0, 7.0};
  const ArForecast forecast = ar_predict(model, series);
  ASSERT_EQ(forecast.first_position, 2);
  ASSERT_EQ(forecast.predictions.size(), 2u);
  EXPECT_DOUBLE_EQ(forecast.predictions[0], series[1]);
  EXPECT_DOUBLE_EQ(forecast.predictions[1], series[2]);
}

TEST(ArPredict, PredictionCountIsLengthMinusOrderMinusDifferencing) {
  Rng rng(5);
  std::vector<double> series;
  for (int i = 0; i < 10; ++i) series.push_back(rng.normal());
  const ArModel model = ar_fit(series, 2, 1);
  const ArForecast forecast = ar_predict(model, series);
  EXPECT_EQ(forecast.predictions.size(), 7u);  // T - p - d = 10 - 2 - 1
  EXPECT_EQ(forecast.first_position, 3);
}

TEST(ArFit, RankDeficientDesignFallsBackToRidge) {
  const std::vector<double> series(30, 1.0);
  const ArModel model = ar_fit(series, 3, 0);
  for (Eigen::Index i = 0; i < model.coefficients.size(); ++i)
    EXPECT_TRUE(std::isfinite(model.coefficients(i)));
  const ArForecast forecast = ar_predict(model, series);
  for (double p : forecast.predictions) EXPECT_NEAR(p, 1.0, 1e-3);
}

}  // namespace

namespace {

TEST(ArPredict, SecondOrderDifferencingReconstructsAQuadratic) {
  // x_t = t^2 has a constant second difference of 2, so one-step forecasts
  // rebuilt from the observed history are exact
  std::vector<double> series;
  for (int t = 0; t < 40; ++t) series.push_back(static_cast<double>(t) * t);
  const ArModel model = ar_fit(series, 1, 2);
  const ArForecast forecast = ar_predict(model, series);
  ASSERT_EQ(forecast.first_position, 3);
  for (std::size_t i = 0; i < forecast.predictions.size(); ++i) {
    const double u = static_cast<double>(forecast.first_position + static_cast<std::int64_t>(i));
    EXPECT_NEAR(forecast.predictions[i], u * u, 1e-6);
  }
}

}  // namespace
