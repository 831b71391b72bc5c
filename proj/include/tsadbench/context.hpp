#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "tsadbench/errors.hpp"
#include "tsadbench/time_series.hpp"

namespace tsadbench {

// Everything that can flow between primitives through the context.
using Value = std::variant<TimeSeries,                     // raw / conditioned signal
                           Matrix,                         // X, y, y_hat
                           std::vector<Timestamp>,         // index
                           std::vector<double>,            // errors
                           std::vector<AnomalyInterval>>;  // anomalies

inline const char* value_type_name(const Value& v) {
  switch (v.index()) {
    case 0: return "series";
    case 1: return "matrix";
    case 2: return "index";
    case 3: return "errors";
    case 4: return "intervals";
  }
  return "?";
}

template <typename T>
const T& value_as(const Value& v, const std::string& context) {
  const T* p = std::get_if<T>(&v);
  if (!p)
    throw BenchError(ErrorCode::TypeMismatch, context + ": unexpected value type '" +
                                                  std::string(value_type_name(v)) + "'");
  return *p;
}

// Single-assignment store for one pipeline execution. Each (key, stage) slot
// is written at most once and values are immutable afterwards; a later stage
// reading a key sees the newest version written before it, so re-derived
// signals (aggregate -> impute -> scale all emitting `signal`) never clobber
// their predecessors.
class ExecutionContext {
 public:
  static constexpr int kEntryStage = -1;

  explicit ExecutionContext(std::uint64_t rng_seed) : rng_seed_(rng_seed) {}

  std::uint64_t rng_seed() const { return rng_seed_; }

  void put(const std::string& key, int stage, Value value) {
    auto& versions = store_[key];
    if (!versions.empty() && versions.back().stage == stage)
      throw BenchError(ErrorCode::SchemaError,
                       "context key '" + key + "' written twice by the same stage");
    versions.push_back(Slot{stage, std::make_shared<const Value>(std::move(value))});
  }

  // Newest version of `key` produced strictly before `stage`.
  const Value& latest_before(const std::string& key, int stage) const {
    auto it = store_.find(key);
    if (it != store_.end()) {
      const auto& versions = it->second;
      for (auto rit = versions.rbegin(); rit != versions.rend(); ++rit)
        if (rit->stage < stage) return *rit->value;
    }
    throw BenchError(ErrorCode::DanglingInput, "context key '" + key + "' not available");
  }

  bool has(const std::string& key) const { return store_.count(key) != 0; }

  const Value& final_value(const std::string& key) const {
    auto it = store_.find(key);
    if (it == store_.end() || it->second.empty())
      throw BenchError(ErrorCode::DanglingInput, "context key '" + key + "' never produced");
    return *it->second.back().value;
  }

 private:
  struct Slot {
    int stage;
    std::shared_ptr<const Value> value;
  };

  std::uint64_t rng_seed_;
  std::map<std::string, std::vector<Slot>> store_;
};

}  // namespace tsadbench
