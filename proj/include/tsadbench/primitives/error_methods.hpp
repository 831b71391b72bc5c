#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tsadbench/errors.hpp"
#include "tsadbench/time_series.hpp"

namespace tsadbench {

// Non-negative anomaly score per timestamp.
struct ErrorSeries {
  std::vector<Timestamp> index;
  std::vector<double> values;
};

// EWMA over the recurrence s_t = a*e_t + (1-a)*s_{t-1} with a = 2/(span+1).
// The state starts at the series mean, so the smoothed variance is
// stationary from the first sample instead of carrying a raw-variance
// transient that downstream thresholding would flag. Span 1 leaves the
// input untouched.
inline std::vector<double> ewma(const std::vector<double>& values, std::int64_t span) {
  if (span < 1) throw BenchError(ErrorCode::ConfigError, "smoothing span must be >= 1");
  if (values.empty() || span == 1) return values;
  const double alpha = 2.0 / (static_cast<double>(span) + 1.0);
  double state = 0.0;
  for (double v : values) state += v;
  state /= static_cast<double>(values.size());
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    state = alpha * values[i] + (1.0 - alpha) * state;
    out[i] = state;
  }
  return out;
}

// Smoothed point-wise residual |y - y_hat|. Multichannel rows contribute the
// channel mean of absolute differences.
inline ErrorSeries regression_errors(const Matrix& y, const Matrix& y_hat,
                                     const std::vector<Timestamp>& index,
                                     std::int64_t smoothing_window) {
  if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols())
    throw BenchError(ErrorCode::LengthMismatch, "y and y_hat shapes differ");
  if (static_cast<std::size_t>(y.rows()) != index.size())
    throw BenchError(ErrorCode::LengthMismatch, "index length does not match row count");

  std::vector<double> raw(static_cast<std::size_t>(y.rows()));
  for (Eigen::Index r = 0; r < y.rows(); ++r)
    raw[static_cast<std::size_t>(r)] = (y.row(r) - y_hat.row(r)).cwiseAbs().mean();

  ErrorSeries out;
  out.index = index;
  out.values = ewma(raw, smoothing_window);
  return out;
}

// Classic dynamic-programming alignment cost with |a_i - b_j| local cost and
// step set {down, right, diagonal}.
inline double dtw_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw BenchError(ErrorCode::EmptySequence, "dtw over empty sequence");
  const std::size_t rows = a.size();
  const std::size_t cols = b.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(cols + 1, inf);
  std::vector<double> curr(cols + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= rows; ++i) {
    curr.assign(cols + 1, inf);
    for (std::size_t j = 1; j <= cols; ++j) {
      const double cost = std::abs(a[i - 1] - b[j - 1]);
      curr[j] = cost + std::min({prev[j], curr[j - 1], prev[j - 1]});
    }
    std::swap(prev, curr);
  }
  return prev[cols];
}

enum class ReconstructionMethod { Point, Area, Dtw };

inline ReconstructionMethod parse_reconstruction_method(const std::string& name) {
  if (name == "point") return ReconstructionMethod::Point;
  if (name == "area") return ReconstructionMethod::Area;
  if (name == "dtw") return ReconstructionMethod::Dtw;
  throw BenchError(ErrorCode::ConfigError, "unknown reconstruction error method '" + name + "'");
}

namespace recon_detail {

inline double trapezoid(const std::vector<double>& values, std::size_t lo, std::size_t hi) {
  double area = 0.0;
  for (std::size_t i = lo; i < hi; ++i) area += 0.5 * (values[i] + values[i + 1]);
  return area;
}

}  // namespace recon_detail

// Per-timestamp reconstruction error from overlapping windows. Rows of X and
// X_hat are windows flattened time-major over `channels`; `index[i]` is the
// timestamp right after window i (its first target), which pins each column
// to a timestamp given the uniform window stride.
//
//  point: mean |X - X_hat| over every window cell covering the timestamp.
//  area:  |trapezoidal integral difference| between the flattened original
//         and reconstruction over a centered window of `window` samples.
//  dtw:   alignment cost between the same centered windows.
inline ErrorSeries reconstruction_errors(const Matrix& X, const Matrix& X_hat,
                                         const std::vector<Timestamp>& index,
                                         ReconstructionMethod method, std::int64_t window,
                                         std::int64_t channels = 1) {
  if (X.rows() != X_hat.rows() || X.cols() != X_hat.cols())
    throw BenchError(ErrorCode::ShapeMismatch, "X and X_hat shapes differ");
  if (static_cast<std::size_t>(X.rows()) != index.size())
    throw BenchError(ErrorCode::LengthMismatch, "index length does not match window count");
  if (channels < 1 || X.cols() % channels != 0)
    throw BenchError(ErrorCode::ShapeMismatch, "column count is not a multiple of channels");
  if (X.rows() == 0) throw BenchError(ErrorCode::EmptySequence, "no windows to score");

  const std::int64_t width = X.cols() / channels;
  const std::int64_t num_windows = X.rows();
  const std::int64_t positions = num_windows + width - 1;
  const Timestamp step = index.size() >= 2 ? index[1] - index[0] : 1;

  std::vector<double> abs_sum(static_cast<std::size_t>(positions), 0.0);
  std::vector<double> orig_sum(static_cast<std::size_t>(positions), 0.0);
  std::vector<double> recon_sum(static_cast<std::size_t>(positions), 0.0);
  std::vector<double> coverage(static_cast<std::size_t>(positions), 0.0);
  for (std::int64_t i = 0; i < num_windows; ++i) {
    for (std::int64_t t = 0; t < width; ++t) {
      const auto pos = static_cast<std::size_t>(i + t);
      for (std::int64_t c = 0; c < channels; ++c) {
        const double orig = X(i, t * channels + c);
        const double recon = X_hat(i, t * channels + c);
        abs_sum[pos] += std::abs(orig - recon);
        orig_sum[pos] += orig;
        recon_sum[pos] += recon;
        coverage[pos] += 1.0;
      }
    }
  }

  std::vector<double> orig_flat(static_cast<std::size_t>(positions));
  std::vector<double> recon_flat(static_cast<std::size_t>(positions));
  for (std::size_t p = 0; p < static_cast<std::size_t>(positions); ++p) {
    orig_flat[p] = orig_sum[p] / coverage[p];
    recon_flat[p] = recon_sum[p] / coverage[p];
  }

  ErrorSeries out;
  out.index.resize(static_cast<std::size_t>(positions));
  out.values.resize(static_cast<std::size_t>(positions));
  for (std::int64_t p = 0; p < positions; ++p)
    out.index[static_cast<std::size_t>(p)] = index[0] + (p - width) * step;

  if (method == ReconstructionMethod::Point) {
    for (std::size_t p = 0; p < static_cast<std::size_t>(positions); ++p)
      out.values[p] = abs_sum[p] / coverage[p];
    return out;
  }

  if (window < 2) throw BenchError(ErrorCode::ConfigError, "centered window must span >= 2 samples");
  const std::int64_t half = window / 2;
  for (std::int64_t p = 0; p < positions; ++p) {
    const auto lo = static_cast<std::size_t>(std::max<std::int64_t>(0, p - half));
    const auto hi = static_cast<std::size_t>(std::min<std::int64_t>(positions - 1, p - half + window - 1));
    if (method == ReconstructionMethod::Area) {
      out.values[static_cast<std::size_t>(p)] = std::abs(recon_detail::trapezoid(orig_flat, lo, hi) -
                                                         recon_detail::trapezoid(recon_flat, lo, hi));
    } else {
      const std::vector<double> wa(orig_flat.begin() + static_cast<std::ptrdiff_t>(lo),
                                   orig_flat.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
      const std::vector<double> wb(recon_flat.begin() + static_cast<std::ptrdiff_t>(lo),
                                   recon_flat.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
      out.values[static_cast<std::size_t>(p)] = dtw_distance(wa, wb);
    }
  }
  return out;
}

// Elementwise product over the timestamps shared by every input series.
inline ErrorSeries combine_errors_product(const std::vector<ErrorSeries>& inputs) {
  if (inputs.empty()) throw BenchError(ErrorCode::EmptySequence, "no error series to combine");

  std::map<Timestamp, double> product;
  for (std::size_t i = 0; i < inputs[0].index.size(); ++i)
    product[inputs[0].index[i]] = inputs[0].values[i];
  for (std::size_t s = 1; s < inputs.size(); ++s) {
    std::map<Timestamp, double> next;
    for (std::size_t i = 0; i < inputs[s].index.size(); ++i) {
      auto it = product.find(inputs[s].index[i]);
      if (it != product.end()) next[it->first] = it->second * inputs[s].values[i];
    }
    product = std::move(next);
  }
  if (product.empty())
    throw BenchError(ErrorCode::EmptyIntersection, "error series share no timestamps");

  ErrorSeries out;
  out.index.reserve(product.size());
  out.values.reserve(product.size());
  for (const auto& [ts, value] : product) {
    out.index.push_back(ts);
    out.values.push_back(value);
  }
  return out;
}

}  // namespace tsadbench
