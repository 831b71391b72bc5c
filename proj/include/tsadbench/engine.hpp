#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tsadbench/context.hpp"
#include "tsadbench/errors.hpp"
#include "tsadbench/registry.hpp"
#include "tsadbench/rng.hpp"
#include "tsadbench/specs.hpp"

namespace tsadbench {

struct PrimitiveTiming {
  std::string primitive;
  double seconds = 0.0;
};

struct DetectResult {
  std::vector<AnomalyInterval> intervals;
  std::vector<PrimitiveTiming> timings;
};

namespace engine_detail {

// Dynamic hyperparameter values resolve against the length of the value a
// primitive actually receives as its first input ("the received signal"),
// so a post-aggregation stage sees post-aggregation lengths.
inline std::int64_t value_length(const Value& value) {
  switch (value.index()) {
    case 0: return std::get<TimeSeries>(value).length();
    case 1: return std::get<Matrix>(value).rows();
    case 2: return static_cast<std::int64_t>(std::get<std::vector<Timestamp>>(value).size());
    case 3: return static_cast<std::int64_t>(std::get<std::vector<double>>(value).size());
    case 4: return static_cast<std::int64_t>(std::get<std::vector<AnomalyInterval>>(value).size());
  }
  return 1;
}

inline Hyperparams resolve_stage(const std::map<std::string, Json>& merged, std::int64_t length) {
  std::map<std::string, Json> resolved;
  for (const auto& [key, value] : merged) resolved[key] = resolve_value(value, std::max<std::int64_t>(1, length));
  return Hyperparams(std::move(resolved));
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace engine_detail

// A pipeline after fit: the spec, one fitted state per primitive, and the
// seed everything was derived from. Immutable, so instances may be shared
// across threads; fit and detect themselves run single-threaded.
class FittedPipeline {
 public:
  FittedPipeline(PipelineSpec spec, std::vector<FittedState> states, std::uint64_t seed)
      : spec_(std::move(spec)), states_(std::move(states)), seed_(seed) {}

  const PipelineSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<FittedState>& states() const { return states_; }

 private:
  PipelineSpec spec_;
  std::vector<FittedState> states_;
  std::uint64_t seed_;
};

namespace engine_detail {

struct StageOutcome {
  double fit_seconds = 0.0;
  double produce_seconds = 0.0;
};

// Runs one primitive: optional fit (training pass only), then produce.
// Any failure is rethrown as PrimitiveError carrying the primitive and stage.
inline StageOutcome run_stage(const PrimitiveRegistry& registry, const PipelineSpec& pipeline,
                              std::size_t stage, ExecutionContext& ctx, FittedState& state,
                              bool run_fit) {
  const std::string& name = pipeline.primitives[stage];
  const PrimitiveBinding& binding = registry.at(name);

  std::vector<const Value*> inputs;
  inputs.reserve(binding.spec.inputs.size());
  for (const std::string& key : binding.spec.inputs)
    inputs.push_back(&ctx.latest_before(key, static_cast<int>(stage)));

  const std::int64_t length = inputs.empty() ? 1 : value_length(*inputs.front());
  const Hyperparams hypers = resolve_stage(pipeline.merged[stage], length);

  StageOutcome outcome;
  if (run_fit && binding.spec.kind == PrimitiveKind::Estimator) {
    Rng rng(mix_seed(ctx.rng_seed(), pipeline.name, static_cast<std::uint64_t>(stage), "fit"));
    const auto start = std::chrono::steady_clock::now();
    try {
      state = binding.fit(inputs, hypers, rng);
    } catch (const BenchError& e) {
      throw PrimitiveError(name, "fit", e.what());
    } catch (const std::exception& e) {
      throw PrimitiveError(name, "fit", e.what());
    }
    outcome.fit_seconds = seconds_since(start);
  }

  Rng rng(mix_seed(ctx.rng_seed(), pipeline.name, static_cast<std::uint64_t>(stage), "produce"));
  const auto start = std::chrono::steady_clock::now();
  std::vector<Value> outputs;
  try {
    outputs = binding.produce(state, inputs, hypers, rng);
  } catch (const BenchError& e) {
    throw PrimitiveError(name, "produce", e.what());
  } catch (const std::exception& e) {
    throw PrimitiveError(name, "produce", e.what());
  }
  outcome.produce_seconds = seconds_since(start);

  if (outputs.size() != binding.spec.outputs.size())
    throw PrimitiveError(name, "produce",
                         "returned " + std::to_string(outputs.size()) + " values for " +
                             std::to_string(binding.spec.outputs.size()) + " declared outputs");
  for (std::size_t i = 0; i < outputs.size(); ++i)
    ctx.put(binding.spec.outputs[i], static_cast<int>(stage), std::move(outputs[i]));
  return outcome;
}

inline std::vector<AnomalyInterval> finalize_intervals(const ExecutionContext& ctx,
                                                       const TimeSeries& series) {
  const auto& raw = value_as<std::vector<AnomalyInterval>>(ctx.final_value("anomalies"),
                                                           "pipeline output 'anomalies'");
  std::vector<AnomalyInterval> normalized = normalize_intervals(raw);
  std::vector<AnomalyInterval> clipped;
  for (auto iv : normalized) {
    iv.start = std::max(iv.start, series.first_timestamp());
    iv.end = std::min(iv.end, series.last_timestamp());
    if (iv.start <= iv.end) clipped.push_back(iv);
  }
  validate_intervals(clipped);
  return clipped;
}

}  // namespace engine_detail

// Train the pipeline on `train`: primitives run in declared order, estimators
// fit before they produce, and every random draw derives from (seed, pipeline
// name, stage), making the result a pure function of its arguments.
inline FittedPipeline fit(const PipelineSpec& pipeline, const PrimitiveRegistry& registry,
                          const TimeSeries& train, std::uint64_t seed,
                          std::vector<PrimitiveTiming>* timings = nullptr) {
  if (train.length() < 2)
    throw BenchError(ErrorCode::SeriesTooShort, "training series must hold at least 2 samples");

  ExecutionContext ctx(seed);
  ctx.put(PipelineSpec::kEntryKey, ExecutionContext::kEntryStage, train);

  std::vector<FittedState> states(pipeline.primitives.size());
  for (std::size_t stage = 0; stage < pipeline.primitives.size(); ++stage) {
    const auto outcome = engine_detail::run_stage(registry, pipeline, stage, ctx, states[stage], true);
    if (timings)
      timings->push_back({pipeline.primitives[stage], outcome.fit_seconds + outcome.produce_seconds});
  }
  return FittedPipeline(pipeline, std::move(states), seed);
}

// Inference pass over `test` using the states captured at fit. Returns the
// sorted, disjoint intervals clipped to the test signal's bounds plus wall
// time per primitive.
inline DetectResult detect(const FittedPipeline& fitted, const PrimitiveRegistry& registry,
                           const TimeSeries& test) {
  if (test.empty())
    throw BenchError(ErrorCode::SeriesTooShort, "test series must hold at least 1 sample");

  ExecutionContext ctx(fitted.seed());
  ctx.put(PipelineSpec::kEntryKey, ExecutionContext::kEntryStage, test);

  DetectResult result;
  std::vector<FittedState> states = fitted.states();
  for (std::size_t stage = 0; stage < fitted.spec().primitives.size(); ++stage) {
    const auto outcome =
        engine_detail::run_stage(registry, fitted.spec(), stage, ctx, states[stage], false);
    result.timings.push_back({fitted.spec().primitives[stage], outcome.produce_seconds});
  }
  result.intervals = engine_detail::finalize_intervals(ctx, test);
  return result;
}

}  // namespace tsadbench
