#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "tsadbench/errors.hpp"
#include "tsadbench/time_series.hpp"

namespace tsadbench {

// Confusion counts for one signal. `tn` is only meaningful for the weighted
// method; the overlapping method counts whole intervals and has no notion of
// a true negative.
struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::optional<std::int64_t> tn;
};

struct Scores {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

enum class MetricMethod { Overlapping, Weighted };

inline MetricMethod parse_metric_method(const std::string& name) {
  if (name == "overlapping") return MetricMethod::Overlapping;
  if (name == "weighted") return MetricMethod::Weighted;
  throw BenchError(ErrorCode::ConfigError, "unknown metric method '" + name + "'");
}

namespace eval_detail {

inline void check_lists(const std::vector<AnomalyInterval>& detected,
                        const std::vector<AnomalyInterval>& truth, Timestamp domain_start,
                        Timestamp domain_end) {
  if (domain_start > domain_end)
    throw BenchError(ErrorCode::MalformedIntervals, "domain start exceeds end");
  for (const auto* list : {&detected, &truth}) {
    validate_intervals(*list);
    for (const auto& iv : *list)
      if (iv.start < domain_start || iv.end > domain_end)
        throw BenchError(ErrorCode::MalformedIntervals, "interval outside the evaluation domain");
  }
}

}  // namespace eval_detail

// Interval-level counting: a truth interval is a true positive when any
// detected interval touches it (closed intervals, shared endpoints count);
// a detected interval that touches no truth interval is one false positive.
inline ConfusionCounts overlapping_segment_counts(const std::vector<AnomalyInterval>& detected,
                                                  const std::vector<AnomalyInterval>& truth,
                                                  Timestamp domain_start, Timestamp domain_end) {
  eval_detail::check_lists(detected, truth, domain_start, domain_end);
  ConfusionCounts counts;
  for (const auto& t : truth) {
    const bool hit = std::any_of(detected.begin(), detected.end(),
                                 [&](const AnomalyInterval& d) { return d.overlaps(t); });
    if (hit)
      ++counts.tp;
    else
      ++counts.fn;
  }
  for (const auto& d : detected) {
    const bool hit = std::any_of(truth.begin(), truth.end(),
                                 [&](const AnomalyInterval& t) { return t.overlaps(d); });
    if (!hit) ++counts.fp;
  }
  return counts;
}

// Duration-weighted counting at one sample per `step`: the domain
// [domain_start, domain_end) is walked in steps and a sample at time t is
// inside an interval [s, e] iff s <= t < e + step. Totals always add up to
// the number of samples in the domain.
inline ConfusionCounts weighted_segment_counts(const std::vector<AnomalyInterval>& detected,
                                               const std::vector<AnomalyInterval>& truth,
                                               Timestamp domain_start, Timestamp domain_end,
                                               Timestamp step = 1) {
  eval_detail::check_lists(detected, truth, domain_start, domain_end);
  if (step < 1) throw BenchError(ErrorCode::ConfigError, "step must be >= 1");

  // Event sweep over interval edges instead of per-sample iteration; each
  // elementary segment contributes its sample count to one cell.
  ConfusionCounts counts;
  counts.tn = 0;
  auto samples_in = [&](Timestamp lo, Timestamp hi) -> std::int64_t {
    // samples t = domain_start + k*step with lo <= t < hi
    if (hi <= lo) return 0;
    auto first = (lo - domain_start + step - 1) / step;  // ceil
    auto last = (hi - domain_start - 1) / step;          // floor of hi-1
    return std::max<std::int64_t>(0, last - first + 1);
  };

  std::vector<Timestamp> edges = {domain_start, domain_end};
  for (const auto* list : {&detected, &truth}) {
    for (const auto& iv : *list) {
      edges.push_back(std::max(domain_start, iv.start));
      edges.push_back(std::min(domain_end, iv.end + step));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  auto member = [&](const std::vector<AnomalyInterval>& list, Timestamp t) {
    return std::any_of(list.begin(), list.end(), [&](const AnomalyInterval& iv) {
      return iv.start <= t && t < iv.end + step;
    });
  };

  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const std::int64_t weight = samples_in(edges[i], edges[i + 1]);
    if (weight == 0) continue;
    const bool in_detected = member(detected, edges[i]);
    const bool in_truth = member(truth, edges[i]);
    if (in_detected && in_truth)
      counts.tp += weight;
    else if (in_detected)
      counts.fp += weight;
    else if (in_truth)
      counts.fn += weight;
    else
      *counts.tn += weight;
  }
  return counts;
}

// Pooled dataset-level scores: counts are summed across signals before the
// ratios are taken, which keeps signals with zero or one anomaly meaningful.
// Any 0/0 stays undefined rather than being coerced to a number.
inline Scores dataset_scores(const std::vector<ConfusionCounts>& per_signal) {
  if (per_signal.empty()) throw BenchError(ErrorCode::ConfigError, "no confusion counts to pool");
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  for (const auto& c : per_signal) {
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
  }
  Scores scores;
  if (tp + fp > 0) scores.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) scores.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (scores.precision && scores.recall && (*scores.precision + *scores.recall) > 0.0)
    scores.f1 = 2.0 * *scores.precision * *scores.recall / (*scores.precision + *scores.recall);
  return scores;
}

}  // namespace tsadbench
