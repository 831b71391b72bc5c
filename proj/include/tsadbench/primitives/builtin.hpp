#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "tsadbench/context.hpp"
#include "tsadbench/engine.hpp"
#include "tsadbench/primitives/ar.hpp"
#include "tsadbench/primitives/autoencoder.hpp"
#include "tsadbench/primitives/error_methods.hpp"
#include "tsadbench/primitives/matrix_profile.hpp"
#include "tsadbench/primitives/preprocess.hpp"
#include "tsadbench/primitives/remote.hpp"
#include "tsadbench/primitives/threshold.hpp"
#include "tsadbench/registry.hpp"

namespace tsadbench {

// Canonical documents for the built-in primitives. The copies shipped under
// primitives/ must stay identical; a test compares them field by field.
inline const std::map<std::string, std::string>& builtin_primitive_documents() {
  static const std::map<std::string, std::string> documents = {
      {"time_segments_aggregate", R"({
  "schema": 1,
  "name": "time_segments_aggregate",
  "kind": "transformer",
  "produce_method": "produce",
  "inputs": ["signal"],
  "outputs": ["signal"],
  "fixed_hyperparameters": {"method": "mean"},
  "tunable_hyperparameters": {
    "interval": {"type": "int", "default": 1}
  }
})"},
      {"mean_impute", R"({
  "schema": 1,
  "name": "mean_impute",
  "kind": "transformer",
  "produce_method": "produce",
  "inputs": ["signal"],
  "outputs": ["signal"],
  "fixed_hyperparameters": {},
  "tunable_hyperparameters": {}
})"},
      {"min_max_scale", R"({
  "schema": 1,
  "name": "min_max_scale",
  "kind": "estimator",
  "fit_method": "fit",
  "produce_method": "transform",
  "inputs": ["signal"],
  "outputs": ["signal"],
  "fixed_hyperparameters": {},
  "tunable_hyperparameters": {
    "feature_range": {"type": "list", "default": [-1, 1]}
  }
})"},
      {"rolling_window_sequences", R"({
  "schema": 1,
  "name": "rolling_window_sequences",
  "kind": "transformer",
  "produce_method": "produce",
  "inputs": ["signal"],
  "outputs": ["X", "y", "index"],
  "fixed_hyperparameters": {},
  "tunable_hyperparameters": {
    "window_size": {"type": "int", "default": 100},
    "target_size": {"type": "int", "default": 1}
  }
})"},
      {"ar_forecast", R"({
  "schema": 1,
  "name": "ar_forecast",
  "kind": "estimator",
  "fit_method": "fit",
  "produce_method": "predict",
  "inputs": ["signal"],
  "outputs": ["y", "y_hat", "index"],
  "fixed_hyperparameters": {},
  "tunable_hyperparameters": {
    "p": {"type": "int", "default": 5},
    "d": {"type": "int", "default": 0}
  }
})"},
      {"matrix_profile", R"({
  "schema": 1,
  "name": "matrix_profile",
  "kind": "transformer",
  "produce_method": "produce",
  "inputs": ["signal"],
  "outputs": ["errors", "index"],
  "fixed_hyperparameters": {},
  "tunable_hyperparameters": {
    "window_size": {"type": "int", "default": 100}
  }
})"},
      {"dense_autoencoder", R"({
  "schema": 1,
  "name": "dense_autoencoder",
  "kind": "estimator",
  "fit_method": "fit",
  "produce_method": "reconstruct",
  "inputs": ["X"],
  "outputs": ["y_hat"],
  "fixed_hyperparameters": {},
  "tunable_hyperparameters": {
    "hidden_units": {"type": "int", "default": 60},
    "latent_units": {"type": "int", "default": 20},
    "epochs": {"type": "int", "default": 50},
    "batch_size": {"type": "int", "default": 64},
    "learning_rate": {"type": "float", "default": 0.05}
  }
})"},
      {"regression_errors", R"({
  "schema": 1,
  "name": "regression_errors",
  "kind": "transformer",
  "produce_method": "produce",
  "inputs": ["y", "y_hat", "index"],
  "outputs": ["errors"],
  "fixed_hyperparameters": {},
  "tunable_hyperparameters": {
    "smoothing_window": {"type": "int", "default": {"fraction_of": "signal_length", "fraction": 0.01}}
  }
})"},
      {"reconstruction_errors", R"({
  "schema": 1,
  "name": "reconstruction_errors",
  "kind": "transformer",
  "produce_method": "produce",
  "inputs": ["X", "y_hat", "index"],
  "outputs": ["errors", "index"],
  "fixed_hyperparameters": {},
  "tunable_hyperparameters": {
    "method": {"type": "str", "default": "point"},
    "window": {"type": "int", "default": 10},
    "channels": {"type": "int", "default": 1}
  }
})"},
      {"find_anomalies", R"({
  "schema": 1,
  "name": "find_anomalies",
  "kind": "transformer",
  "produce_method": "produce",
  "inputs": ["errors", "index"],
  "outputs": ["anomalies"],
  "fixed_hyperparameters": {},
  "tunable_hyperparameters": {
    "window_size": {"type": "int", "default": {"fraction_of": "signal_length", "fraction": 0.3}},
    "window_size_perc": {"type": "float", "default": 0.0},
    "z": {"type": "float", "default": 4.0},
    "padding": {"type": "int", "default": 0},
    "min_percent_gap": {"type": "float", "default": 0.0}
  }
})"},
      {"remote_detect", R"({
  "schema": 1,
  "name": "remote_detect",
  "kind": "transformer",
  "produce_method": "produce",
  "inputs": ["signal"],
  "outputs": ["anomalies"],
  "fixed_hyperparameters": {},
  "tunable_hyperparameters": {
    "endpoint": {"type": "str", "default": ""},
    "timeout": {"type": "float", "default": 10.0},
    "retries": {"type": "int", "default": 3},
    "auth_token": {"type": "str", "default": ""}
  }
})"},
      {"unstable_noise", R"({
  "schema": 1,
  "name": "unstable_noise",
  "kind": "transformer",
  "produce_method": "produce",
  "inputs": ["signal"],
  "outputs": ["errors", "index"],
  "fixed_hyperparameters": {},
  "tunable_hyperparameters": {}
})"}};
  return documents;
}

namespace builtin_detail {

inline const TimeSeries& in_series(const std::vector<const Value*>& inputs, std::size_t i,
                                   const std::string& who) {
  return value_as<TimeSeries>(*inputs.at(i), who);
}

inline const Matrix& in_matrix(const std::vector<const Value*>& inputs, std::size_t i,
                               const std::string& who) {
  return value_as<Matrix>(*inputs.at(i), who);
}

inline const std::vector<Timestamp>& in_index(const std::vector<const Value*>& inputs, std::size_t i,
                                              const std::string& who) {
  return value_as<std::vector<Timestamp>>(*inputs.at(i), who);
}

inline const std::vector<double>& in_errors(const std::vector<const Value*>& inputs, std::size_t i,
                                            const std::string& who) {
  return value_as<std::vector<double>>(*inputs.at(i), who);
}

}  // namespace builtin_detail

// Registry with every built-in primitive bound to its implementation.
inline PrimitiveRegistry builtin_registry() {
  using builtin_detail::in_errors;
  using builtin_detail::in_index;
  using builtin_detail::in_matrix;
  using builtin_detail::in_series;

  PrimitiveRegistry registry;
  const auto& documents = builtin_primitive_documents();
  auto spec_of = [&](const std::string& name) { return load_primitive_spec(documents.at(name)); };

  registry.add(PrimitiveBinding{
      spec_of("time_segments_aggregate"), nullptr,
      [](const FittedState&, const std::vector<const Value*>& in, const Hyperparams& hp, Rng&) {
        if (hp.get_string("method") != "mean")
          throw BenchError(ErrorCode::ConfigError, "only mean aggregation is supported");
        return std::vector<Value>{
            time_segments_aggregate(in_series(in, 0, "time_segments_aggregate"), hp.get_int("interval"))};
      }});

  registry.add(PrimitiveBinding{
      spec_of("mean_impute"), nullptr,
      [](const FittedState&, const std::vector<const Value*>& in, const Hyperparams&, Rng&) {
        return std::vector<Value>{mean_impute(in_series(in, 0, "mean_impute"))};
      }});

  registry.add(PrimitiveBinding{
      spec_of("min_max_scale"),
      [](const std::vector<const Value*>& in, const Hyperparams& hp, Rng&) -> FittedState {
        const Json& range = hp.get_list("feature_range");
        if (range.size() != 2 || !range[0].is_number() || !range[1].is_number())
          throw BenchError(ErrorCode::ConfigError, "feature_range must be [lo, hi]");
        return MinMaxScaler::fit(in_series(in, 0, "min_max_scale"), range[0].get<double>(),
                                 range[1].get<double>());
      },
      [](const FittedState& state, const std::vector<const Value*>& in, const Hyperparams&, Rng&) {
        const auto& scaler = std::get<MinMaxScaler>(state);
        return std::vector<Value>{scaler.transform(in_series(in, 0, "min_max_scale"))};
      }});

  registry.add(PrimitiveBinding{
      spec_of("rolling_window_sequences"), nullptr,
      [](const FittedState&, const std::vector<const Value*>& in, const Hyperparams& hp, Rng&) {
        WindowedData w = rolling_window_sequences(in_series(in, 0, "rolling_window_sequences"),
                                                  hp.get_int("window_size"), hp.get_int("target_size"));
        return std::vector<Value>{std::move(w.X), std::move(w.y), std::move(w.index)};
      }});

  registry.add(PrimitiveBinding{
      spec_of("ar_forecast"),
      [](const std::vector<const Value*>& in, const Hyperparams& hp, Rng&) -> FittedState {
        const TimeSeries& series = in_series(in, 0, "ar_forecast");
        std::vector<ArModel> models;
        for (Eigen::Index c = 0; c < series.channels(); ++c)
          models.push_back(ar_fit(series.channel(c), hp.get_int("p"), hp.get_int("d")));
        return models;
      },
      [](const FittedState& state, const std::vector<const Value*>& in, const Hyperparams&, Rng&) {
        const auto& models = std::get<std::vector<ArModel>>(state);
        const TimeSeries& series = in_series(in, 0, "ar_forecast");
        if (static_cast<Eigen::Index>(models.size()) != series.channels())
          throw BenchError(ErrorCode::ShapeMismatch, "model fitted on a different channel count");

        const std::int64_t first = models.front().p + models.front().d;
        const std::int64_t count = series.length() - first;
        if (count < 1)
          throw BenchError(ErrorCode::SeriesTooShort, "series shorter than the fitted model order");

        Matrix y(count, series.channels());
        Matrix y_hat(count, series.channels());
        for (Eigen::Index c = 0; c < series.channels(); ++c) {
          const ArForecast forecast = ar_predict(models[static_cast<std::size_t>(c)], series.channel(c));
          for (std::int64_t i = 0; i < count; ++i) {
            y(i, c) = series.values()(first + i, c);
            y_hat(i, c) = forecast.predictions[static_cast<std::size_t>(i)];
          }
        }
        std::vector<Timestamp> index(series.timestamps().begin() + first, series.timestamps().end());
        return std::vector<Value>{std::move(y), std::move(y_hat), std::move(index)};
      }});

  registry.add(PrimitiveBinding{
      spec_of("matrix_profile"), nullptr,
      [](const FittedState&, const std::vector<const Value*>& in, const Hyperparams& hp, Rng&) {
        const TimeSeries& series = in_series(in, 0, "matrix_profile");
        if (series.channels() != 1)
          throw BenchError(ErrorCode::MultivariateUnsupported, "matrix profile needs a univariate series");
        const std::int64_t m = hp.get_int("window_size");
        const MatrixProfile mp = matrix_profile(series.channel(0), m);
        // each profile value describes the window around it, so anchor it at
        // the window's center timestamp
        std::vector<Timestamp> index;
        index.reserve(mp.profile.size());
        for (std::size_t i = 0; i < mp.profile.size(); ++i)
          index.push_back(series.timestamps()[i + static_cast<std::size_t>(m / 2)]);
        return std::vector<Value>{mp.profile, std::move(index)};
      }});

  registry.add(PrimitiveBinding{
      spec_of("dense_autoencoder"),
      [](const std::vector<const Value*>& in, const Hyperparams& hp, Rng& rng) -> FittedState {
        const Matrix& X = in_matrix(in, 0, "dense_autoencoder");
        const std::vector<std::int64_t> sizes = {X.cols(), hp.get_int("hidden_units"),
                                                 hp.get_int("latent_units"), hp.get_int("hidden_units"),
                                                 X.cols()};
        DenseAutoencoder net = DenseAutoencoder::initialize(sizes, rng);
        net.fit(X, hp.get_int("epochs"), hp.get_int("batch_size"), hp.get_double("learning_rate"), rng);
        return net;
      },
      [](const FittedState& state, const std::vector<const Value*>& in, const Hyperparams&, Rng&) {
        const auto& net = std::get<DenseAutoencoder>(state);
        return std::vector<Value>{net.reconstruct(in_matrix(in, 0, "dense_autoencoder"))};
      }});

  registry.add(PrimitiveBinding{
      spec_of("regression_errors"), nullptr,
      [](const FittedState&, const std::vector<const Value*>& in, const Hyperparams& hp, Rng&) {
        ErrorSeries errors = regression_errors(in_matrix(in, 0, "regression_errors"),
                                               in_matrix(in, 1, "regression_errors"),
                                               in_index(in, 2, "regression_errors"),
                                               hp.get_int("smoothing_window"));
        return std::vector<Value>{std::move(errors.values)};
      }});

  registry.add(PrimitiveBinding{
      spec_of("reconstruction_errors"), nullptr,
      [](const FittedState&, const std::vector<const Value*>& in, const Hyperparams& hp, Rng&) {
        ErrorSeries errors = reconstruction_errors(
            in_matrix(in, 0, "reconstruction_errors"), in_matrix(in, 1, "reconstruction_errors"),
            in_index(in, 2, "reconstruction_errors"), parse_reconstruction_method(hp.get_string("method")),
            hp.get_int("window"), hp.get_int("channels"));
        return std::vector<Value>{std::move(errors.values), std::move(errors.index)};
      }});

  registry.add(PrimitiveBinding{
      spec_of("find_anomalies"), nullptr,
      [](const FittedState&, const std::vector<const Value*>& in, const Hyperparams& hp, Rng&) {
        ErrorSeries errors;
        errors.values = in_errors(in, 0, "find_anomalies");
        errors.index = in_index(in, 1, "find_anomalies");

        ThresholdConfig config;
        config.window_size = hp.get_int("window_size");
        const double perc = hp.get_double("window_size_perc");
        if (perc > 0.0)
          config.window_size = resolve_fraction(perc, static_cast<std::int64_t>(errors.values.size()));
        config.z = hp.get_double("z");
        config.padding = hp.get_int("padding");
        config.min_percent_gap = hp.get_double("min_percent_gap");
        return std::vector<Value>{find_anomalies(errors, config)};
      }});

  registry.add(PrimitiveBinding{
      spec_of("remote_detect"), nullptr,
      [](const FittedState&, const std::vector<const Value*>& in, const Hyperparams& hp, Rng&) {
        RemoteDetectorConfig config;
        config.endpoint = hp.get_string("endpoint");
        config.timeout_seconds = hp.get_double("timeout");
        config.retries = hp.get_int("retries");
        config.auth_token = hp.get_string("auth_token");
        return std::vector<Value>{remote_detect(config, in_series(in, 0, "remote_detect"))};
      }});

  // Test double for the verification gate: the spike position comes from the
  // OS entropy pool, so two runs with the same seed disagree.
  registry.add(PrimitiveBinding{
      spec_of("unstable_noise"), nullptr,
      [](const FittedState&, const std::vector<const Value*>& in, const Hyperparams&, Rng&) {
        const TimeSeries& series = in_series(in, 0, "unstable_noise");
        std::vector<double> errors(static_cast<std::size_t>(series.length()), 0.0);
        std::random_device device;
        errors[device() % errors.size()] = 100.0;
        return std::vector<Value>{std::move(errors), series.timestamps()};
      }});

  return registry;
}

}  // namespace tsadbench
