#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tsadbench/primitives/matrix_profile.hpp"
#include "tsadbench/rng.hpp"

using namespace tsadbench;

namespace {

void expect_matches_oracle(const std::vector<double>& series, std::int64_t m) {
  const MatrixProfile fast = matrix_profile(series, m);
  const auto naive = oracles::naive_matrix_profile(series, m, matrix_profile_exclusion(m));
  ASSERT_EQ(fast.profile.size(), naive.profile.size());
  for (std::size_t i = 0; i < fast.profile.size(); ++i) {
    const double denom = std::max(1.0, std::abs(naive.profile[i]));
    EXPECT_LE(std::abs(fast.profile[i] - naive.profile[i]) / denom, 1e-6)
        << "window " << i << " (m=" << m << ", T=" << series.size() << ")";
  }
}

TEST(MatrixProfile, PeriodicSignalHasNearZeroProfile) {
  const std::vector<double> series = {0, 1, 0, 1, 0, 1, 0, 1};
  const MatrixProfile mp = matrix_profile(series, 3);
  EXPECT_EQ(mp.exclusion, 1);  // neighbors closer than ceil(3/2) are trivial
  for (std::size_t i = 0; i < mp.profile.size(); ++i) {
    EXPECT_NEAR(mp.profile[i], 0.0, 1e-9) << "window " << i;
    EXPECT_GT(std::llabs(static_cast<std::int64_t>(i) - mp.profile_index[i]), mp.exclusion);
  }
  expect_matches_oracle(series, 3);
}

TEST(MatrixProfile, MatchesBruteForceOnRandomSeries) {
  Rng rng(99);
  for (int round = 0; round < 5; ++round) {
    std::vector<double> series;
    const auto total = static_cast<std::size_t>(rng.uniform_int(64, 256));
    for (std::size_t i = 0; i < total; ++i) series.push_back(rng.normal());
    expect_matches_oracle(series, 8);
  }
}

TEST(MatrixProfile, ConstantStretchesFollowTheDocumentedRule) {
  // flat head, sine tail: flat windows match each other at distance zero,
  // mixed pairs sit at sqrt(m)
  std::vector<double> series(40, 2.0);
  for (int i = 0; i < 40; ++i) series.push_back(std::sin(0.4 * i));
  expect_matches_oracle(series, 8);

  const std::vector<double> flat(32, 1.0);
  const MatrixProfile mp = matrix_profile(flat, 4);
  for (double v : mp.profile) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(MatrixProfile, ShiftAndScaleInvariant) {
  Rng rng(21);
  std::vector<double> series;
  for (int i = 0; i < 200; ++i) series.push_back(rng.normal());
  const MatrixProfile base = matrix_profile(series, 16);
  std::vector<double> transformed;
  for (double v : series) transformed.push_back(3.5 * v - 11.0);
  const MatrixProfile moved = matrix_profile(transformed, 16);
  for (std::size_t i = 0; i < base.profile.size(); ++i)
    EXPECT_NEAR(base.profile[i], moved.profile[i], 1e-6 * std::max(1.0, base.profile[i]));
}

TEST(MatrixProfile, DiscordStandsOut) {
  std::vector<double> series;
  for (int i = 0; i < 300; ++i) series.push_back(std::sin(2.0 * M_PI * i / 25.0));
  for (int i = 140; i < 150; ++i) series[static_cast<std::size_t>(i)] += 4.0;  // bump
  const MatrixProfile mp = matrix_profile(series, 25);
  const auto peak = std::max_element(mp.profile.begin(), mp.profile.end()) - mp.profile.begin();
  EXPECT_GE(peak, 115);
  EXPECT_LE(peak, 150);
}

TEST(MatrixProfile, TooShortSeriesIsRejected) {
  std::vector<double> series(15, 1.0);  // 2m - 1 for m = 8
  try {
    matrix_profile(series, 8);
    FAIL() << "expected SeriesTooShort";
  } catch (const BenchError& e) {
    EXPECT_EQ(e.code(), ErrorCode::SeriesTooShort);
  }
}

TEST(MatrixProfile, MinimumLengthStaysTotal) {
  // at T = 2m every window still has an admissible neighbor
  Rng rng(4);
  for (std::int64_t m : {4, 5, 8}) {
    std::vector<double> series;
    for (std::int64_t i = 0; i < 2 * m; ++i) series.push_back(rng.normal());
    expect_matches_oracle(series, m);
    const MatrixProfile mp = matrix_profile(series, m);
    for (std::size_t i = 0; i < mp.profile.size(); ++i) {
      EXPECT_TRUE(std::isfinite(mp.profile[i]));
      EXPECT_GE(mp.profile_index[i], 0);
      EXPECT_LT(mp.profile_index[i], static_cast<std::int64_t>(mp.profile.size()));
    }
  }
}

TEST(MatrixProfile, ProfileValuesAreNonNegative) {
  Rng rng(55);
  std::vector<double> series;
  for (int i = 0; i < 128; ++i) series.push_back(rng.uniform(-1, 1));
  const MatrixProfile mp = matrix_profile(series, 4);
  for (double v : mp.profile) EXPECT_GE(v, 0.0);
}

}  // namespace
