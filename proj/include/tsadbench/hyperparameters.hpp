#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "tsadbench/errors.hpp"

namespace tsadbench {

using Json = nlohmann::json;

// A hyperparameter value is either a JSON literal (int, real, string, bool,
// list) or a dynamic spec {"fraction_of": "signal_length", "fraction": f}
// resolved against the length of the signal a primitive receives.
inline bool is_dynamic_value(const Json& value) {
  return value.is_object() && value.contains("fraction_of") && value.contains("fraction");
}

inline void check_dynamic_value(const Json& value) {
  if (value.at("fraction_of") != "signal_length")
    throw BenchError(ErrorCode::SchemaError, "dynamic value: unsupported fraction_of '" +
                                                 value.at("fraction_of").dump() + "'");
  if (!value.at("fraction").is_number())
    throw BenchError(ErrorCode::TypeMismatch, "dynamic value: fraction must be a number");
  const double f = value.at("fraction").get<double>();
  if (!(f > 0.0) || f > 1.0)
    throw BenchError(ErrorCode::SchemaError, "dynamic value: fraction must lie in (0, 1]");
}

// max(1, round(fraction * length)); clamping keeps the result a positive
// integer even for tiny fractions of short signals.
inline std::int64_t resolve_fraction(double fraction, std::int64_t signal_length) {
  const auto rounded = static_cast<std::int64_t>(std::llround(fraction * static_cast<double>(signal_length)));
  return std::max<std::int64_t>(1, rounded);
}

inline Json resolve_value(const Json& value, std::int64_t signal_length) {
  if (!is_dynamic_value(value)) return value;
  return Json(resolve_fraction(value.at("fraction").get<double>(), signal_length));
}

// Declared tunable-hyperparameter types from primitive documents.
enum class HyperType { Int, Float, Str, Bool, List };

inline HyperType parse_hyper_type(const std::string& name) {
  if (name == "int") return HyperType::Int;
  if (name == "float") return HyperType::Float;
  if (name == "str" || name == "string") return HyperType::Str;
  if (name == "bool") return HyperType::Bool;
  if (name == "list") return HyperType::List;
  throw BenchError(ErrorCode::SchemaError, "unknown hyperparameter type '" + name + "'");
}

inline const char* to_string(HyperType t) {
  switch (t) {
    case HyperType::Int: return "int";
    case HyperType::Float: return "float";
    case HyperType::Str: return "str";
    case HyperType::Bool: return "bool";
    case HyperType::List: return "list";
  }
  return "?";
}

// Dynamic values are only admissible where an int is expected.
inline bool value_matches_type(const Json& value, HyperType type) {
  if (is_dynamic_value(value)) return type == HyperType::Int;
  switch (type) {
    case HyperType::Int: return value.is_number_integer() || value.is_number_unsigned();
    case HyperType::Float: return value.is_number();
    case HyperType::Str: return value.is_string();
    case HyperType::Bool: return value.is_boolean();
    case HyperType::List: return value.is_array();
  }
  return false;
}

// Fully resolved hyperparameter map handed to a primitive implementation.
class Hyperparams {
 public:
  Hyperparams() = default;
  explicit Hyperparams(std::map<std::string, Json> values) : values_(std::move(values)) {}

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::int64_t get_int(const std::string& key) const {
    const Json& v = at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
      throw BenchError(ErrorCode::TypeMismatch, "hyperparameter '" + key + "' is not an int");
    return v.get<std::int64_t>();
  }

  double get_double(const std::string& key) const {
    const Json& v = at(key);
    if (!v.is_number()) throw BenchError(ErrorCode::TypeMismatch, "hyperparameter '" + key + "' is not numeric");
    return v.get<double>();
  }

  std::string get_string(const std::string& key) const {
    const Json& v = at(key);
    if (!v.is_string()) throw BenchError(ErrorCode::TypeMismatch, "hyperparameter '" + key + "' is not a string");
    return v.get<std::string>();
  }

  bool get_bool(const std::string& key) const {
    const Json& v = at(key);
    if (!v.is_boolean()) throw BenchError(ErrorCode::TypeMismatch, "hyperparameter '" + key + "' is not a bool");
    return v.get<bool>();
  }

  const Json& get_list(const std::string& key) const {
    const Json& v = at(key);
    if (!v.is_array()) throw BenchError(ErrorCode::TypeMismatch, "hyperparameter '" + key + "' is not a list");
    return v;
  }

  const std::map<std::string, Json>& values() const { return values_; }

 private:
  const Json& at(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
      throw BenchError(ErrorCode::SchemaError, "hyperparameter '" + key + "' missing");
    return it->second;
  }

  std::map<std::string, Json> values_;
};

}  // namespace tsadbench
