#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsadbench/errors.hpp"
#include "tsadbench/hyperparameters.hpp"

namespace tsadbench {

enum class PrimitiveKind { Transformer, Estimator };

struct TunableHyperparameter {
  HyperType type = HyperType::Int;
  Json default_value;
};

// Declarative description of one processing step: what it consumes and
// produces in the execution context, and which hyperparameters it exposes.
struct PrimitiveSpec {
  std::string name;
  PrimitiveKind kind = PrimitiveKind::Transformer;
  std::optional<std::string> fit_method;
  std::string produce_method;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, Json> fixed_hyperparameters;
  std::map<std::string, TunableHyperparameter> tunable_hyperparameters;

  bool declares(const std::string& key) const {
    return fixed_hyperparameters.count(key) != 0 || tunable_hyperparameters.count(key) != 0;
  }

  // Defaults only; pipeline init overrides are merged at pipeline load.
  std::map<std::string, Json> default_hyperparameters() const {
    std::map<std::string, Json> out = fixed_hyperparameters;
    for (const auto& [key, tunable] : tunable_hyperparameters) out[key] = tunable.default_value;
    return out;
  }
};

enum class PipelineStatus { Sandbox, Verified };

namespace detail {

inline Json parse_json_document(const std::string& text) {
  Json doc = Json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw BenchError(ErrorCode::SchemaError, "document is not valid JSON");
  return doc;
}

inline std::string require_string(const Json& doc, const std::string& field) {
  if (!doc.contains(field) || !doc.at(field).is_string())
    throw BenchError(ErrorCode::SchemaError, "missing or non-string field '" + field + "'");
  return doc.at(field).get<std::string>();
}

inline std::vector<std::string> require_name_list(const Json& doc, const std::string& field) {
  if (!doc.contains(field) || !doc.at(field).is_array())
    throw BenchError(ErrorCode::SchemaError, "missing or non-array field '" + field + "'");
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const Json& item : doc.at(field)) {
    if (!item.is_string() || item.get<std::string>().empty())
      throw BenchError(ErrorCode::SchemaError, "field '" + field + "' must hold nonempty names");
    const std::string name = item.get<std::string>();
    if (!seen.insert(name).second)
      throw BenchError(ErrorCode::SchemaError, "duplicate name '" + name + "' in '" + field + "'");
    out.push_back(name);
  }
  return out;
}

inline void require_schema_version(const Json& doc) {
  if (!doc.contains("schema") || doc.at("schema") != Json(1))
    throw BenchError(ErrorCode::SchemaError, "document must declare \"schema\": 1");
}

}  // namespace detail

inline PrimitiveSpec load_primitive_spec(const std::string& json_text) {
  const Json doc = detail::parse_json_document(json_text);
  detail::require_schema_version(doc);

  PrimitiveSpec spec;
  spec.name = detail::require_string(doc, "name");

  const std::string kind = detail::require_string(doc, "kind");
  if (kind == "transformer")
    spec.kind = PrimitiveKind::Transformer;
  else if (kind == "estimator")
    spec.kind = PrimitiveKind::Estimator;
  else
    throw BenchError(ErrorCode::SchemaError, "kind must be 'transformer' or 'estimator', got '" + kind + "'");

  if (doc.contains("fit_method")) {
    if (!doc.at("fit_method").is_string())
      throw BenchError(ErrorCode::SchemaError, "fit_method must be a string");
    spec.fit_method = doc.at("fit_method").get<std::string>();
  }
  if (spec.kind == PrimitiveKind::Estimator && !spec.fit_method)
    throw BenchError(ErrorCode::SchemaError, "estimator '" + spec.name + "' requires fit_method");
  if (spec.kind == PrimitiveKind::Transformer && spec.fit_method)
    throw BenchError(ErrorCode::SchemaError, "transformer '" + spec.name + "' must not declare fit_method");

  spec.produce_method = detail::require_string(doc, "produce_method");
  spec.inputs = detail::require_name_list(doc, "inputs");
  spec.outputs = detail::require_name_list(doc, "outputs");
  if (spec.inputs.empty())
    throw BenchError(ErrorCode::SchemaError, "primitive '" + spec.name + "' declares no inputs");
  if (spec.outputs.empty())
    throw BenchError(ErrorCode::SchemaError, "primitive '" + spec.name + "' declares no outputs");

  if (doc.contains("fixed_hyperparameters")) {
    if (!doc.at("fixed_hyperparameters").is_object())
      throw BenchError(ErrorCode::SchemaError, "fixed_hyperparameters must be an object");
    for (const auto& [key, value] : doc.at("fixed_hyperparameters").items()) {
      if (is_dynamic_value(value)) check_dynamic_value(value);
      spec.fixed_hyperparameters[key] = value;
    }
  }

  if (doc.contains("tunable_hyperparameters")) {
    if (!doc.at("tunable_hyperparameters").is_object())
      throw BenchError(ErrorCode::SchemaError, "tunable_hyperparameters must be an object");
    for (const auto& [key, entry] : doc.at("tunable_hyperparameters").items()) {
      if (!entry.is_object() || !entry.contains("type") || !entry.contains("default"))
        throw BenchError(ErrorCode::SchemaError,
                         "tunable '" + key + "' needs {\"type\": ..., \"default\": ...}");
      TunableHyperparameter tunable;
      tunable.type = parse_hyper_type(entry.at("type").get<std::string>());
      tunable.default_value = entry.at("default");
      if (is_dynamic_value(tunable.default_value)) check_dynamic_value(tunable.default_value);
      if (!value_matches_type(tunable.default_value, tunable.type))
        throw BenchError(ErrorCode::TypeMismatch, "default for '" + key + "' does not match declared type '" +
                                                      std::string(to_string(tunable.type)) + "'");
      if (spec.fixed_hyperparameters.count(key))
        throw BenchError(ErrorCode::SchemaError, "hyperparameter '" + key + "' declared both fixed and tunable");
      spec.tunable_hyperparameters[key] = std::move(tunable);
    }
  }

  return spec;
}

// Ordered, data-flow-validated composition of primitives. `merged` holds the
// per-primitive hyperparameter maps after init overrides; dynamic values stay
// unresolved until execution.
struct PipelineSpec {
  std::string name;
  PipelineStatus status = PipelineStatus::Sandbox;
  std::vector<std::string> primitives;
  std::map<std::string, std::map<std::string, Json>> init;
  std::vector<std::map<std::string, Json>> merged;

  static constexpr const char* kEntryKey = "signal";
};

class PrimitiveRegistry;  // defined in registry.hpp

namespace detail {

// Data-flow check over the declared linear order: a primitive may only read
// keys produced by an earlier primitive or the pipeline entry key.
inline void check_data_flow(const PipelineSpec& pipeline,
                            const std::vector<const PrimitiveSpec*>& specs) {
  std::set<std::string> available = {PipelineSpec::kEntryKey};
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (const std::string& input : specs[i]->inputs) {
      if (!available.count(input))
        throw BenchError(ErrorCode::DanglingInput,
                         "pipeline '" + pipeline.name + "': primitive '" + specs[i]->name +
                             "' consumes '" + input + "' before it is produced");
    }
    for (const std::string& output : specs[i]->outputs) available.insert(output);
  }
}

}  // namespace detail

}  // namespace tsadbench
