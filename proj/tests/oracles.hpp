// Independent reference implementations used to pin expected values in
// tests. Everything here is deliberately naive (direct definitions, no
// shared code with the library paths under test).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "tsadbench/time_series.hpp"

namespace oracles {

// --- matrix profile: O(n^2 m) all-pairs z-normalized distances -------------

struct NaiveProfile {
  std::vector<double> profile;
  std::vector<std::int64_t> profile_index;
};

inline bool window_constant(const std::vector<double>& x, std::int64_t start, std::int64_t m) {
  for (std::int64_t k = 1; k < m; ++k)
    if (x[static_cast<std::size_t>(start + k)] != x[static_cast<std::size_t>(start)]) return false;
  return true;
}

inline std::vector<double> znormalize(const std::vector<double>& x, std::int64_t start,
                                      std::int64_t m) {
  double mean = 0.0;
  for (std::int64_t k = 0; k < m; ++k) mean += x[static_cast<std::size_t>(start + k)];
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (std::int64_t k = 0; k < m; ++k) {
    const double d = x[static_cast<std::size_t>(start + k)] - mean;
    var += d * d;
  }
  const double sd = std::sqrt(var / static_cast<double>(m));
  std::vector<double> out(static_cast<std::size_t>(m));
  for (std::int64_t k = 0; k < m; ++k)
    out[static_cast<std::size_t>(k)] = (x[static_cast<std::size_t>(start + k)] - mean) / sd;
  return out;
}

// Same pair conventions as the production rule: constant-vs-constant is 0,
// constant-vs-anything-else is sqrt(m); eligibility is |i - j| > exclusion.
inline NaiveProfile naive_matrix_profile(const std::vector<double>& series, std::int64_t m,
                                         std::int64_t exclusion) {
  const auto total = static_cast<std::int64_t>(series.size());
  const std::int64_t windows = total - m + 1;
  NaiveProfile out;
  out.profile.assign(static_cast<std::size_t>(windows), std::numeric_limits<double>::infinity());
  out.profile_index.assign(static_cast<std::size_t>(windows), -1);

  for (std::int64_t i = 0; i < windows; ++i) {
    for (std::int64_t j = 0; j < windows; ++j) {
      if (std::llabs(i - j) <= exclusion) continue;
      const bool ci = window_constant(series, i, m);
      const bool cj = window_constant(series, j, m);
      double dist;
      if (ci && cj) {
        dist = 0.0;
      } else if (ci || cj) {
        dist = std::sqrt(static_cast<double>(m));
      } else {
        const auto a = znormalize(series, i, m);
        const auto b = znormalize(series, j, m);
        double sum = 0.0;
        for (std::int64_t k = 0; k < m; ++k) {
          const double d = a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)];
          sum += d * d;
        }
        dist = std::sqrt(sum);
      }
      if (dist < out.profile[static_cast<std::size_t>(i)]) {
        out.profile[static_cast<std::size_t>(i)] = dist;
        out.profile_index[static_cast<std::size_t>(i)] = j;
      }
    }
  }
  return out;
}

// --- dtw: exhaustive minimum over all monotone warping paths ---------------

inline double dtw_paths(const std::vector<double>& a, const std::vector<double>& b, std::size_t i,
                        std::size_t j) {
  const double cost = std::abs(a[i] - b[j]);
  if (i == a.size() - 1 && j == b.size() - 1) return cost;
  double best = std::numeric_limits<double>::infinity();
  if (i + 1 < a.size()) best = std::min(best, dtw_paths(a, b, i + 1, j));
  if (j + 1 < b.size()) best = std::min(best, dtw_paths(a, b, i, j + 1));
  if (i + 1 < a.size() && j + 1 < b.size()) best = std::min(best, dtw_paths(a, b, i + 1, j + 1));
  return cost + best;
}

inline double exhaustive_dtw(const std::vector<double>& a, const std::vector<double>& b) {
  return dtw_paths(a, b, 0, 0);
}

// --- interval scoring -------------------------------------------------------

struct Counts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;
};

inline bool closed_overlap(const tsadbench::AnomalyInterval& a, const tsadbench::AnomalyInterval& b) {
  return a.start <= b.end && b.start <= a.end;
}

inline Counts pairwise_overlap_counts(const std::vector<tsadbench::AnomalyInterval>& detected,
                                      const std::vector<tsadbench::AnomalyInterval>& truth) {
  Counts c;
  for (const auto& t : truth) {
    bool hit = false;
    for (const auto& d : detected) hit = hit || closed_overlap(d, t);
    hit ? ++c.tp : ++c.fn;
  }
  for (const auto& d : detected) {
    bool hit = false;
    for (const auto& t : truth) hit = hit || closed_overlap(d, t);
    if (!hit) ++c.fp;
  }
  return c;
}

// Walks every sample in the domain and checks membership directly.
inline Counts per_sample_counts(const std::vector<tsadbench::AnomalyInterval>& detected,
                                const std::vector<tsadbench::AnomalyInterval>& truth,
                                std::int64_t domain_start, std::int64_t domain_end,
                                std::int64_t step = 1) {
  auto member = [&](const std::vector<tsadbench::AnomalyInterval>& list, std::int64_t t) {
    for (const auto& iv : list)
      if (iv.start <= t && t < iv.end + step) return true;
    return false;
  };
  Counts c;
  for (std::int64_t t = domain_start; t < domain_end; t += step) {
    const bool in_d = member(detected, t);
    const bool in_t = member(truth, t);
    if (in_d && in_t)
      ++c.tp;
    else if (in_d)
      ++c.fp;
    else if (in_t)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

// --- numerical gradients -----------------------------------------------------

// Central finite differences of a scalar function of a flat parameter vector.
inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& at,
    double epsilon = 1e-6) {
  Eigen::VectorXd grad(at.size());
  for (Eigen::Index k = 0; k < at.size(); ++k) {
    Eigen::VectorXd hi = at;
    Eigen::VectorXd lo = at;
    hi(k) += epsilon;
    lo(k) -= epsilon;
    grad(k) = (f(hi) - f(lo)) / (2.0 * epsilon);
  }
  return grad;
}

// --- least squares through plain normal equations ---------------------------

// Gaussian elimination with partial pivoting on (X^T X) beta = X^T y.
inline std::vector<double> normal_equations_solve(const std::vector<std::vector<double>>& X,
                                                  const std::vector<double>& y) {
  const std::size_t n = X.size();
  const std::size_t k = X[0].size();
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t i = 0; i < n; ++i) a[r][c] += X[i][r] * X[i][c];
    for (std::size_t i = 0; i < n; ++i) a[r][k] += X[i][r] * y[i];
  }
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col || a[col][col] == 0.0) continue;
      const double factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= k; ++c) a[r][c] -= factor * a[col][c];
    }
  }
  std::vector<double> beta(k, 0.0);
  for (std::size_t r = 0; r < k; ++r) beta[r] = a[r][r] != 0.0 ? a[r][k] / a[r][r] : 0.0;
  return beta;
}

}  // namespace oracles
