#pragma once

#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "tsadbench/context.hpp"
#include "tsadbench/errors.hpp"
#include "tsadbench/hyperparameters.hpp"
#include "tsadbench/primitives/ar.hpp"
#include "tsadbench/primitives/autoencoder.hpp"
#include "tsadbench/primitives/preprocess.hpp"
#include "tsadbench/rng.hpp"
#include "tsadbench/specs.hpp"

namespace tsadbench {

// State captured by an estimator during fit and reused by produce.
using FittedState = std::variant<std::monostate, MinMaxScaler, std::vector<ArModel>, DenseAutoencoder>;

// Implementation hooks behind a primitive document. Inputs arrive in the
// order the document declares them; produce must return one value per
// declared output, in order.
struct PrimitiveBinding {
  PrimitiveSpec spec;
  std::function<FittedState(const std::vector<const Value*>&, const Hyperparams&, Rng&)> fit;
  std::function<std::vector<Value>(const FittedState&, const std::vector<const Value*>&,
                                   const Hyperparams&, Rng&)>
      produce;
};

class PrimitiveRegistry {
 public:
  void add(PrimitiveBinding binding) {
    const std::string name = binding.spec.name;
    if (bindings_.count(name))
      throw BenchError(ErrorCode::SchemaError, "primitive '" + name + "' registered twice");
    if (binding.spec.kind == PrimitiveKind::Estimator && !binding.fit)
      throw BenchError(ErrorCode::SchemaError, "estimator '" + name + "' has no fit implementation");
    if (!binding.produce)
      throw BenchError(ErrorCode::SchemaError, "primitive '" + name + "' has no produce implementation");
    bindings_.emplace(name, std::move(binding));
  }

  bool contains(const std::string& name) const { return bindings_.count(name) != 0; }

  const PrimitiveBinding& at(const std::string& name) const {
    auto it = bindings_.find(name);
    if (it == bindings_.end())
      throw BenchError(ErrorCode::UnknownPrimitive, "primitive '" + name + "' is not registered");
    return it->second;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(bindings_.size());
    for (const auto& [name, binding] : bindings_) out.push_back(name);
    return out;
  }

 private:
  std::map<std::string, PrimitiveBinding> bindings_;
};

// Parse and validate a pipeline document against the registry: every
// primitive must resolve, init overrides must target declared
// hyperparameters with compatible types, and the data flow must be
// satisfiable in the declared order.
inline PipelineSpec load_pipeline_spec(const std::string& json_text,
                                       const PrimitiveRegistry& registry) {
  const Json doc = detail::parse_json_document(json_text);
  detail::require_schema_version(doc);

  PipelineSpec pipeline;
  pipeline.name = detail::require_string(doc, "name");

  const std::string status = detail::require_string(doc, "status");
  if (status == "sandbox")
    pipeline.status = PipelineStatus::Sandbox;
  else if (status == "verified")
    pipeline.status = PipelineStatus::Verified;
  else
    throw BenchError(ErrorCode::SchemaError,
                     "status must be 'sandbox' or 'verified', got '" + status + "'");

  pipeline.primitives = detail::require_name_list(doc, "primitives");
  if (pipeline.primitives.empty())
    throw BenchError(ErrorCode::SchemaError, "pipeline '" + pipeline.name + "' lists no primitives");

  std::vector<const PrimitiveSpec*> specs;
  for (const std::string& name : pipeline.primitives) {
    if (!registry.contains(name))
      throw BenchError(ErrorCode::UnknownPrimitive,
                       "pipeline '" + pipeline.name + "' references unknown primitive '" + name + "'");
    specs.push_back(&registry.at(name).spec);
  }

  if (doc.contains("init")) {
    if (!doc.at("init").is_object())
      throw BenchError(ErrorCode::SchemaError, "init must be an object");
    for (const auto& [primitive, overrides] : doc.at("init").items()) {
      if (std::find(pipeline.primitives.begin(), pipeline.primitives.end(), primitive) ==
          pipeline.primitives.end())
        throw BenchError(ErrorCode::BadOverride,
                         "init targets '" + primitive + "', which is not in the pipeline");
      if (!overrides.is_object())
        throw BenchError(ErrorCode::SchemaError, "init for '" + primitive + "' must be an object");
      const PrimitiveSpec& spec = registry.at(primitive).spec;
      for (const auto& [key, value] : overrides.items()) {
        if (!spec.declares(key))
          throw BenchError(ErrorCode::BadOverride, "primitive '" + primitive +
                                                       "' declares no hyperparameter '" + key + "'");
        if (is_dynamic_value(value)) check_dynamic_value(value);
        auto tunable = spec.tunable_hyperparameters.find(key);
        if (tunable != spec.tunable_hyperparameters.end() &&
            !value_matches_type(value, tunable->second.type))
          throw BenchError(ErrorCode::TypeMismatch,
                           "override for '" + primitive + "." + key + "' does not match type '" +
                               std::string(to_string(tunable->second.type)) + "'");
        pipeline.init[primitive][key] = value;
      }
    }
  }

  detail::check_data_flow(pipeline, specs);

  for (const std::string& name : pipeline.primitives) {
    std::map<std::string, Json> merged = registry.at(name).spec.default_hyperparameters();
    auto it = pipeline.init.find(name);
    if (it != pipeline.init.end())
      for (const auto& [key, value] : it->second) merged[key] = value;
    pipeline.merged.push_back(std::move(merged));
  }
  return pipeline;
}

// Replace every dynamic hyperparameter value with its integer resolution
// against `signal_length`; literals pass through untouched. Resolution is
// monotone in the length.
inline std::vector<std::map<std::string, Json>> resolve_hyperparameters(
    const PipelineSpec& pipeline, std::int64_t signal_length) {
  if (signal_length < 1) throw BenchError(ErrorCode::ConfigError, "signal_length must be >= 1");
  std::vector<std::map<std::string, Json>> resolved = pipeline.merged;
  for (auto& stage : resolved)
    for (auto& [key, value] : stage) value = resolve_value(value, signal_length);
  return resolved;
}

}  // namespace tsadbench
