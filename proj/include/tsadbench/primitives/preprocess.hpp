#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "tsadbench/errors.hpp"
#include "tsadbench/time_series.hpp"

namespace tsadbench {

// Bucketed mean aggregation. Buckets start at multiples of `interval` from
// the first timestamp; a bucket with no samples is emitted as NaN so the
// imputer downstream can fill it. NaN samples inside a bucket are ignored.
inline TimeSeries time_segments_aggregate(const TimeSeries& series, std::int64_t interval) {
  if (interval < 1) throw BenchError(ErrorCode::ConfigError, "aggregation interval must be >= 1");
  if (series.empty()) throw BenchError(ErrorCode::SeriesTooShort, "cannot aggregate an empty series");

  const Timestamp t0 = series.first_timestamp();
  const auto bucket_count =
      static_cast<std::int64_t>((series.last_timestamp() - t0) / interval) + 1;
  const Eigen::Index n = series.channels();

  Matrix sums = Matrix::Zero(bucket_count, n);
  Matrix counts = Matrix::Zero(bucket_count, n);
  for (Eigen::Index row = 0; row < series.length(); ++row) {
    const auto bucket = (series.timestamps()[static_cast<std::size_t>(row)] - t0) / interval;
    for (Eigen::Index c = 0; c < n; ++c) {
      const double v = series.values()(row, c);
      if (std::isnan(v)) continue;
      sums(bucket, c) += v;
      counts(bucket, c) += 1.0;
    }
  }

  std::vector<Timestamp> timestamps(static_cast<std::size_t>(bucket_count));
  Matrix values(bucket_count, n);
  for (std::int64_t b = 0; b < bucket_count; ++b) {
    timestamps[static_cast<std::size_t>(b)] = t0 + b * interval;
    for (Eigen::Index c = 0; c < n; ++c)
      values(b, c) = counts(b, c) > 0 ? sums(b, c) / counts(b, c)
                                      : std::numeric_limits<double>::quiet_NaN();
  }
  return TimeSeries(std::move(timestamps), std::move(values));
}

// Replace NaN entries with the per-channel mean of the observed values.
// Idempotent; a channel with no observed value at all is an error.
inline TimeSeries mean_impute(const TimeSeries& series) {
  Matrix values = series.values();
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    double sum = 0.0;
    std::int64_t count = 0;
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
      if (!std::isnan(values(r, c))) {
        sum += values(r, c);
        ++count;
      }
    }
    if (count == 0)
      throw BenchError(ErrorCode::AllMissing, "channel " + std::to_string(c) + " has no observed values");
    const double mean = sum / static_cast<double>(count);
    for (Eigen::Index r = 0; r < values.rows(); ++r)
      if (std::isnan(values(r, c))) values(r, c) = mean;
  }
  return TimeSeries(series.timestamps(), std::move(values));
}

// Per-channel affine map of the fitted [min, max] onto a target range.
// Constant channels map to the range midpoint and raise a warning flag
// instead of failing.
struct MinMaxScaler {
  Eigen::VectorXd minima;
  Eigen::VectorXd maxima;
  double range_lo = -1.0;
  double range_hi = 1.0;
  std::vector<bool> constant_channel;

  bool any_constant() const {
    for (bool c : constant_channel)
      if (c) return true;
    return false;
  }

  static MinMaxScaler fit(const TimeSeries& train, double lo = -1.0, double hi = 1.0) {
    if (train.empty()) throw BenchError(ErrorCode::SeriesTooShort, "cannot fit scaler on empty series");
    if (!(hi > lo)) throw BenchError(ErrorCode::ConfigError, "scaler range must satisfy hi > lo");
    MinMaxScaler s;
    s.range_lo = lo;
    s.range_hi = hi;
    s.minima = train.values().colwise().minCoeff();
    s.maxima = train.values().colwise().maxCoeff();
    s.constant_channel.resize(static_cast<std::size_t>(train.channels()));
    for (Eigen::Index c = 0; c < train.channels(); ++c)
      s.constant_channel[static_cast<std::size_t>(c)] = !(s.maxima(c) > s.minima(c));
    return s;
  }

  // No clipping: values outside the fitted extent extrapolate past the range.
  TimeSeries transform(const TimeSeries& series) const {
    if (series.channels() != minima.size())
      throw BenchError(ErrorCode::ShapeMismatch, "scaler fitted on a different channel count");
    Matrix values = series.values();
    const double mid = 0.5 * (range_lo + range_hi);
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (constant_channel[static_cast<std::size_t>(c)]) {
        for (Eigen::Index r = 0; r < values.rows(); ++r) values(r, c) = mid;
        continue;
      }
      const double scale = (range_hi - range_lo) / (maxima(c) - minima(c));
      for (Eigen::Index r = 0; r < values.rows(); ++r)
        values(r, c) = range_lo + (values(r, c) - minima(c)) * scale;
    }
    return TimeSeries(series.timestamps(), std::move(values));
  }

  TimeSeries inverse_transform(const TimeSeries& series) const {
    if (series.channels() != minima.size())
      throw BenchError(ErrorCode::ShapeMismatch, "scaler fitted on a different channel count");
    Matrix values = series.values();
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (constant_channel[static_cast<std::size_t>(c)]) {
        for (Eigen::Index r = 0; r < values.rows(); ++r) values(r, c) = minima(c);
        continue;
      }
      const double scale = (maxima(c) - minima(c)) / (range_hi - range_lo);
      for (Eigen::Index r = 0; r < values.rows(); ++r)
        values(r, c) = minima(c) + (values(r, c) - range_lo) * scale;
    }
    return TimeSeries(series.timestamps(), std::move(values));
  }
};

// Sliding windows plus the targets that immediately follow them. For n > 1
// channels every row is flattened time-major: column j holds channel j % n of
// time offset j / n. `index[i]` is the timestamp of window i's first target.
struct WindowedData {
  Matrix X;
  Matrix y;
  std::vector<Timestamp> index;
};

inline WindowedData rolling_window_sequences(const TimeSeries& series, std::int64_t window_size,
                                             std::int64_t target_size) {
  if (window_size < 1 || target_size < 1)
    throw BenchError(ErrorCode::ConfigError, "window_size and target_size must be >= 1");
  const std::int64_t total = series.length();
  const std::int64_t num_windows = total - window_size - target_size + 1;
  if (num_windows < 1)
    throw BenchError(ErrorCode::SeriesTooShort,
                     "need at least window_size + target_size = " +
                         std::to_string(window_size + target_size) + " samples, got " +
                         std::to_string(total));

  const Eigen::Index n = series.channels();
  WindowedData out;
  out.X.resize(num_windows, window_size * n);
  out.y.resize(num_windows, target_size * n);
  out.index.resize(static_cast<std::size_t>(num_windows));
  for (std::int64_t i = 0; i < num_windows; ++i) {
    for (std::int64_t j = 0; j < window_size; ++j)
      for (Eigen::Index c = 0; c < n; ++c) out.X(i, j * n + c) = series.values()(i + j, c);
    for (std::int64_t j = 0; j < target_size; ++j)
      for (Eigen::Index c = 0; c < n; ++c)
        out.y(i, j * n + c) = series.values()(i + window_size + j, c);
    out.index[static_cast<std::size_t>(i)] =
        series.timestamps()[static_cast<std::size_t>(i + window_size)];
  }
  return out;
}

}  // namespace tsadbench
