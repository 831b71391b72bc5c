#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "tsadbench/errors.hpp"

namespace tsadbench {

// Per-window z-normalized Euclidean distance to the nearest non-trivial
// neighbor. Large values mark discords. `exclusion` is the trivial-match
// radius: windows j with |i - j| <= exclusion never count as neighbors of i.
struct MatrixProfile {
  std::vector<double> profile;
  std::vector<std::int64_t> profile_index;
  std::int64_t subsequence_length = 0;
  std::int64_t exclusion = 0;
};

namespace mp_detail {

struct WindowStats {
  std::vector<double> mean;
  std::vector<double> std;  // population std
  std::vector<char> constant;
};

// A window is constant iff all its samples are equal (exact comparison, so
// the streaming path and any brute-force reference agree bit for bit).
inline WindowStats window_stats(const std::vector<double>& series, std::int64_t m) {
  const auto total = static_cast<std::int64_t>(series.size());
  const std::int64_t windows = total - m + 1;
  WindowStats stats;
  stats.mean.resize(static_cast<std::size_t>(windows));
  stats.std.resize(static_cast<std::size_t>(windows));
  stats.constant.resize(static_cast<std::size_t>(windows));

  std::vector<double> prefix(static_cast<std::size_t>(total) + 1, 0.0);
  std::vector<double> prefix_sq(static_cast<std::size_t>(total) + 1, 0.0);
  for (std::int64_t i = 0; i < total; ++i) {
    prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + series[static_cast<std::size_t>(i)];
    prefix_sq[static_cast<std::size_t>(i) + 1] =
        prefix_sq[static_cast<std::size_t>(i)] + series[static_cast<std::size_t>(i)] * series[static_cast<std::size_t>(i)];
  }
  for (std::int64_t i = 0; i < windows; ++i) {
    const double sum = prefix[static_cast<std::size_t>(i + m)] - prefix[static_cast<std::size_t>(i)];
    const double sum_sq = prefix_sq[static_cast<std::size_t>(i + m)] - prefix_sq[static_cast<std::size_t>(i)];
    const double mean = sum / static_cast<double>(m);
    const double var = std::max(0.0, sum_sq / static_cast<double>(m) - mean * mean);
    stats.mean[static_cast<std::size_t>(i)] = mean;
    stats.std[static_cast<std::size_t>(i)] = std::sqrt(var);
    double lo = series[static_cast<std::size_t>(i)];
    double hi = lo;
    for (std::int64_t j = 1; j < m; ++j) {
      lo = std::min(lo, series[static_cast<std::size_t>(i + j)]);
      hi = std::max(hi, series[static_cast<std::size_t>(i + j)]);
    }
    stats.constant[static_cast<std::size_t>(i)] = (lo == hi);
  }
  return stats;
}

// Distance between windows i and j given their dot product. Constant windows
// have no z-normalized form, so the pair rule is: both constant -> 0, exactly
// one constant -> sqrt(m).
inline double pair_distance(double dot, std::int64_t m, const WindowStats& stats, std::int64_t i,
                            std::int64_t j) {
  const bool ci = stats.constant[static_cast<std::size_t>(i)];
  const bool cj = stats.constant[static_cast<std::size_t>(j)];
  if (ci && cj) return 0.0;
  if (ci || cj) return std::sqrt(static_cast<double>(m));
  const double md = static_cast<double>(m);
  double rho = (dot - md * stats.mean[static_cast<std::size_t>(i)] * stats.mean[static_cast<std::size_t>(j)]) /
               (md * stats.std[static_cast<std::size_t>(i)] * stats.std[static_cast<std::size_t>(j)]);
  rho = std::clamp(rho, -1.0, 1.0);
  return std::sqrt(2.0 * md * (1.0 - rho));
}

}  // namespace mp_detail

// Neighbors closer than ceil(m/2) windows are trivial matches; the stored
// radius is the largest excluded offset, so eligibility is |i - j| > radius.
// With this zone every series of length >= 2m has an admissible neighbor for
// every window.
inline std::int64_t matrix_profile_exclusion(std::int64_t m) { return (m + 1) / 2 - 1; }

// O(n^2) running-dot-product scheme: the first row of dot products is built
// directly, every following row is updated in O(1) per column. Requires a
// univariate series with at least 2m samples.
inline MatrixProfile matrix_profile(const std::vector<double>& series, std::int64_t m) {
  if (m < 2) throw BenchError(ErrorCode::ConfigError, "subsequence length must be >= 2");
  const auto total = static_cast<std::int64_t>(series.size());
  if (total < 2 * m)
    throw BenchError(ErrorCode::SeriesTooShort, "matrix profile needs at least 2m = " +
                                                    std::to_string(2 * m) + " samples, got " +
                                                    std::to_string(total));

  const std::int64_t windows = total - m + 1;
  const std::int64_t exclusion = matrix_profile_exclusion(m);
  const mp_detail::WindowStats stats = mp_detail::window_stats(series, m);

  MatrixProfile result;
  result.subsequence_length = m;
  result.exclusion = exclusion;
  result.profile.assign(static_cast<std::size_t>(windows), std::numeric_limits<double>::infinity());
  result.profile_index.assign(static_cast<std::size_t>(windows), -1);

  // first row: plain dot products window_0 . window_j
  std::vector<double> qt(static_cast<std::size_t>(windows), 0.0);
  for (std::int64_t j = 0; j < windows; ++j) {
    double dot = 0.0;
    for (std::int64_t k = 0; k < m; ++k)
      dot += series[static_cast<std::size_t>(k)] * series[static_cast<std::size_t>(j + k)];
    qt[static_cast<std::size_t>(j)] = dot;
  }
  const std::vector<double> first_row = qt;

  auto consider = [&](std::int64_t i, std::int64_t j, double dot) {
    if (std::llabs(i - j) <= exclusion) return;
    const double dist = mp_detail::pair_distance(dot, m, stats, i, j);
    if (dist < result.profile[static_cast<std::size_t>(i)]) {
      result.profile[static_cast<std::size_t>(i)] = dist;
      result.profile_index[static_cast<std::size_t>(i)] = j;
    }
  };

  for (std::int64_t j = 0; j < windows; ++j) consider(0, j, qt[static_cast<std::size_t>(j)]);

  for (std::int64_t i = 1; i < windows; ++i) {
    for (std::int64_t j = windows - 1; j >= 1; --j) {
      qt[static_cast<std::size_t>(j)] =
          qt[static_cast<std::size_t>(j - 1)] -
          series[static_cast<std::size_t>(i - 1)] * series[static_cast<std::size_t>(j - 1)] +
          series[static_cast<std::size_t>(i + m - 1)] * series[static_cast<std::size_t>(j + m - 1)];
    }
    qt[0] = first_row[static_cast<std::size_t>(i)];  // dot(window_i, window_0), symmetric
    for (std::int64_t j = 0; j < windows; ++j) consider(i, j, qt[static_cast<std::size_t>(j)]);
  }

  return result;
}

}  // namespace tsadbench
