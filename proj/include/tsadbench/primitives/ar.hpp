#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tsadbench/errors.hpp"

namespace tsadbench {

// Autoregressive forecaster of order p on the d-times-differenced series.
// Coefficients are the least-squares solution of the one-step-ahead problem;
// a rank-deficient lag matrix falls back to a lightly ridged solve.
struct ArModel {
  std::int64_t p = 0;
  std::int64_t d = 0;
  Eigen::VectorXd coefficients;  // lag 1 .. lag p
  double intercept = 0.0;
};

namespace detail {

inline std::vector<double> difference(const std::vector<double>& x, std::int64_t d) {
  std::vector<double> z = x;
  for (std::int64_t round = 0; round < d; ++round) {
    if (z.size() < 2) throw BenchError(ErrorCode::SeriesTooShort, "series too short to difference");
    std::vector<double> next(z.size() - 1);
    for (std::size_t i = 1; i < z.size(); ++i) next[i - 1] = z[i] - z[i - 1];
    z = std::move(next);
  }
  return z;
}

inline std::int64_t binomial(std::int64_t n, std::int64_t k) {
  std::int64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i) r = r * (n - i + 1) / i;
  return r;
}

}  // namespace detail

inline ArModel ar_fit(const std::vector<double>& series, std::int64_t p, std::int64_t d) {
  if (p < 1) throw BenchError(ErrorCode::ConfigError, "autoregressive order must be >= 1");
  if (d < 0) throw BenchError(ErrorCode::ConfigError, "difference order must be >= 0");
  if (static_cast<std::int64_t>(series.size()) < p + d + 1)
    throw BenchError(ErrorCode::SeriesTooShort,
                     "need at least p + d + 1 = " + std::to_string(p + d + 1) + " samples, got " +
                         std::to_string(series.size()));

  const std::vector<double> z = detail::difference(series, d);
  const auto m = static_cast<std::int64_t>(z.size());  // m = T - d >= p + 1

  const std::int64_t rows = m - p;
  Eigen::MatrixXd design(rows, p + 1);
  Eigen::VectorXd target(rows);
  for (std::int64_t i = 0; i < rows; ++i) {
    design(i, 0) = 1.0;
    for (std::int64_t k = 1; k <= p; ++k) design(i, k) = z[static_cast<std::size_t>(p + i - k)];
    target(i) = z[static_cast<std::size_t>(p + i)];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  Eigen::VectorXd params;
  if (qr.rank() < design.cols()) {
    const double lambda = 1e-8;
    Eigen::MatrixXd gram = design.transpose() * design;
    gram.diagonal().array() += lambda;
    params = gram.ldlt().solve(design.transpose() * target);
  } else {
    params = qr.solve(target);
  }

  ArModel model;
  model.p = p;
  model.d = d;
  model.intercept = params(0);
  model.coefficients = params.tail(p);
  for (Eigen::Index i = 0; i < model.coefficients.size(); ++i)
    if (!std::isfinite(model.coefficients(i)) || !std::isfinite(model.intercept))
      throw BenchError(ErrorCode::NonFiniteLoss, "autoregressive fit produced non-finite coefficients");
  return model;
}

struct ArForecast {
  // One-step-ahead forecasts for series positions p + d .. T - 1.
  std::vector<double> predictions;
  std::int64_t first_position = 0;
};

// Predict every admissible position of `series` using observed history only
// (no recursive forecasting). With d > 0 the predicted difference is added
// back onto the binomially weighted tail of the observed values.
inline ArForecast ar_predict(const ArModel& model, const std::vector<double>& series) {
  const auto total = static_cast<std::int64_t>(series.size());
  if (total < model.p + model.d + 1)
    throw BenchError(ErrorCode::SeriesTooShort, "series shorter than model order");

  const std::vector<double> z = detail::difference(series, model.d);
  const auto m = static_cast<std::int64_t>(z.size());

  ArForecast out;
  out.first_position = model.p + model.d;
  out.predictions.reserve(static_cast<std::size_t>(m - model.p));
  for (std::int64_t t = model.p; t < m; ++t) {
    double zhat = model.intercept;
    for (std::int64_t k = 1; k <= model.p; ++k)
      zhat += model.coefficients(k - 1) * z[static_cast<std::size_t>(t - k)];
    // position in the original series this prediction lands on
    const std::int64_t u = t + model.d;
    double xhat = zhat;
    for (std::int64_t k = 1; k <= model.d; ++k) {
      const double sign = (k % 2 == 1) ? 1.0 : -1.0;
      xhat += sign * static_cast<double>(detail::binomial(model.d, k)) *
              series[static_cast<std::size_t>(u - k)];
    }
    out.predictions.push_back(xhat);
  }
  return out;
}

}  // namespace tsadbench
