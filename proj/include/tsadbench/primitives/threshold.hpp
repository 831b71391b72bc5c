#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "tsadbench/errors.hpp"
#include "tsadbench/primitives/error_methods.hpp"
#include "tsadbench/time_series.hpp"

namespace tsadbench {

// Moving-window thresholding of an error series. The series is cut into
// consecutive windows of `window_size`; within each window an entry is
// flagged when it strictly exceeds mean + z * std (population std, so a
// zero-variance window flags nothing). Flagged runs separated by at most
// `padding + round(min_percent_gap * window_size)` unflagged entries merge
// into one interval whose severity is the largest flagged error.
struct ThresholdConfig {
  std::int64_t window_size = 0;  // resolved; must be >= 1
  double z = 4.0;
  double min_percent_gap = 0.0;
  std::int64_t padding = 0;
};

inline std::vector<AnomalyInterval> find_anomalies(const ErrorSeries& errors,
                                                   const ThresholdConfig& config) {
  if (errors.values.empty()) throw BenchError(ErrorCode::EmptySequence, "empty error series");
  if (errors.values.size() != errors.index.size())
    throw BenchError(ErrorCode::LengthMismatch, "error series index/value lengths differ");
  if (config.window_size < 1) throw BenchError(ErrorCode::ConfigError, "window_size must be >= 1");
  if (!(config.z > 0.0)) throw BenchError(ErrorCode::ConfigError, "z must be positive");
  if (config.padding < 0 || config.min_percent_gap < 0.0)
    throw BenchError(ErrorCode::ConfigError, "padding and min_percent_gap must be >= 0");

  const auto total = static_cast<std::int64_t>(errors.values.size());
  std::vector<char> flagged(static_cast<std::size_t>(total), 0);
  for (std::int64_t start = 0; start < total; start += config.window_size) {
    const std::int64_t stop = std::min(start + config.window_size, total);
    const auto count = static_cast<double>(stop - start);
    double sum = 0.0;
    for (std::int64_t i = start; i < stop; ++i) sum += errors.values[static_cast<std::size_t>(i)];
    const double mean = sum / count;
    double var = 0.0;
    for (std::int64_t i = start; i < stop; ++i) {
      const double dev = errors.values[static_cast<std::size_t>(i)] - mean;
      var += dev * dev;
    }
    const double threshold = mean + config.z * std::sqrt(var / count);
    for (std::int64_t i = start; i < stop; ++i)
      if (errors.values[static_cast<std::size_t>(i)] > threshold)
        flagged[static_cast<std::size_t>(i)] = 1;
  }

  const std::int64_t merge_gap =
      config.padding +
      static_cast<std::int64_t>(std::llround(config.min_percent_gap * static_cast<double>(config.window_size)));

  std::vector<AnomalyInterval> intervals;
  std::int64_t run_start = -1;
  std::int64_t run_end = -1;
  double run_peak = 0.0;
  auto emit = [&]() {
    if (run_start < 0) return;
    intervals.emplace_back(errors.index[static_cast<std::size_t>(run_start)],
                           errors.index[static_cast<std::size_t>(run_end)], run_peak);
    run_start = -1;
  };
  for (std::int64_t i = 0; i < total; ++i) {
    if (!flagged[static_cast<std::size_t>(i)]) continue;
    const double value = errors.values[static_cast<std::size_t>(i)];
    if (run_start >= 0 && i - run_end - 1 <= merge_gap) {
      run_end = i;
      run_peak = std::max(run_peak, value);
    } else {
      emit();
      run_start = i;
      run_end = i;
      run_peak = value;
    }
  }
  emit();
  return intervals;
}

}  // namespace tsadbench
