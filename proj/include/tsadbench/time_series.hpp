#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tsadbench/errors.hpp"

namespace tsadbench {

using Matrix = Eigen::MatrixXd;
using Timestamp = std::int64_t;

// Timestamped signal with one or more channels. Timestamps are integer
// seconds, strictly increasing; values are stored as T rows x n channels.
// NaN entries mark missing observations (they stay legal until an imputer
// runs, e.g. straight after bucketed aggregation).
class TimeSeries {
 public:
  TimeSeries() = default;

  TimeSeries(std::vector<Timestamp> timestamps, Matrix values)
      : timestamps_(std::move(timestamps)), values_(std::move(values)) {
    if (static_cast<Eigen::Index>(timestamps_.size()) != values_.rows())
      throw BenchError(ErrorCode::InvalidSeries, "timestamp count does not match value rows");
    if (values_.cols() < 1)
      throw BenchError(ErrorCode::InvalidSeries, "series needs at least one channel");
    for (std::size_t i = 1; i < timestamps_.size(); ++i)
      if (timestamps_[i] <= timestamps_[i - 1])
        throw BenchError(ErrorCode::InvalidSeries, "timestamps must be strictly increasing");
  }

  static TimeSeries univariate(std::vector<Timestamp> timestamps, const std::vector<double>& values) {
    Matrix m(static_cast<Eigen::Index>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = values[i];
    return TimeSeries(std::move(timestamps), std::move(m));
  }

  Eigen::Index length() const { return values_.rows(); }
  Eigen::Index channels() const { return values_.cols(); }
  bool empty() const { return values_.rows() == 0; }

  const std::vector<Timestamp>& timestamps() const { return timestamps_; }
  const Matrix& values() const { return values_; }

  Timestamp first_timestamp() const { return timestamps_.front(); }
  Timestamp last_timestamp() const { return timestamps_.back(); }

  // Smallest gap between consecutive timestamps; the native sampling step
  // for regularly sampled data. Defined as 1 for singleton series.
  Timestamp step() const {
    if (timestamps_.size() < 2) return 1;
    Timestamp best = timestamps_[1] - timestamps_[0];
    for (std::size_t i = 2; i < timestamps_.size(); ++i)
      best = std::min(best, timestamps_[i] - timestamps_[i - 1]);
    return best;
  }

  std::vector<double> channel(Eigen::Index c) const {
    std::vector<double> out(static_cast<std::size_t>(values_.rows()));
    for (Eigen::Index i = 0; i < values_.rows(); ++i) out[static_cast<std::size_t>(i)] = values_(i, c);
    return out;
  }

 private:
  std::vector<Timestamp> timestamps_;
  Matrix values_;
};

// Closed interval of timestamps flagged as anomalous, either detected or
// ground truth. Severity is informational only.
struct AnomalyInterval {
  Timestamp start = 0;
  Timestamp end = 0;
  std::optional<double> severity;

  AnomalyInterval() = default;
  AnomalyInterval(Timestamp s, Timestamp e, std::optional<double> sev = std::nullopt)
      : start(s), end(e), severity(sev) {
    if (start > end) throw BenchError(ErrorCode::InvalidInterval, "interval start exceeds end");
  }

  bool overlaps(const AnomalyInterval& other) const {
    return start <= other.end && other.start <= end;
  }

  friend bool operator==(const AnomalyInterval& a, const AnomalyInterval& b) {
    return a.start == b.start && a.end == b.end;
  }
};

inline void validate_intervals(const std::vector<AnomalyInterval>& intervals) {
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].start > intervals[i].end)
      throw BenchError(ErrorCode::MalformedIntervals, "interval start exceeds end");
    if (i > 0 && intervals[i].start <= intervals[i - 1].end)
      throw BenchError(ErrorCode::MalformedIntervals, "intervals overlap or are unsorted");
  }
}

// Sort, then merge anything that overlaps or touches, yielding the canonical
// sorted/disjoint form every detection result must satisfy.
inline std::vector<AnomalyInterval> normalize_intervals(std::vector<AnomalyInterval> intervals) {
  std::sort(intervals.begin(), intervals.end(), [](const AnomalyInterval& a, const AnomalyInterval& b) {
    return a.start < b.start || (a.start == b.start && a.end < b.end);
  });
  std::vector<AnomalyInterval> merged;
  for (const auto& iv : intervals) {
    if (!merged.empty() && iv.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, iv.end);
      if (iv.severity) {
        double prev = merged.back().severity.value_or(*iv.severity);
        merged.back().severity = std::max(prev, *iv.severity);
      }
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

}  // namespace tsadbench
