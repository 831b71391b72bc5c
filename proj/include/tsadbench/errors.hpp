#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tsadbench {

// Every failure surfaced by the library carries one of these codes so
// callers can branch on the condition without parsing messages.
enum class ErrorCode {
  // spec / pipeline loading
  SchemaError,
  TypeMismatch,
  UnknownPrimitive,
  DanglingInput,
  BadOverride,
  // execution
  PrimitiveError,
  SeriesTooShort,
  MultivariateUnsupported,
  AllMissing,
  LengthMismatch,
  ShapeMismatch,
  EmptySequence,
  EmptyIntersection,
  NonFiniteLoss,
  InvalidSeries,
  InvalidInterval,
  // evaluation / analytics
  MalformedIntervals,
  MissingBaseline,
  NotPermutation,
  NoCommonDatasets,
  DuplicateVersion,
  BadVersionString,
  // data
  ConfigError,
  NotRegistered,
  FetchFailed,
  ParseError,
  OverlapError,
  // remote detector
  Timeout,
  BadResponse,
  HttpStatus,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::UnknownPrimitive: return "UnknownPrimitive";
    case ErrorCode::DanglingInput: return "DanglingInput";
    case ErrorCode::BadOverride: return "BadOverride";
    case ErrorCode::PrimitiveError: return "PrimitiveError";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::MultivariateUnsupported: return "MultivariateUnsupported";
    case ErrorCode::AllMissing: return "AllMissing";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InvalidSeries: return "InvalidSeries";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::MalformedIntervals: return "MalformedIntervals";
    case ErrorCode::MissingBaseline: return "MissingBaseline";
    case ErrorCode::NotPermutation: return "NotPermutation";
    case ErrorCode::NoCommonDatasets: return "NoCommonDatasets";
    case ErrorCode::DuplicateVersion: return "DuplicateVersion";
    case ErrorCode::BadVersionString: return "BadVersionString";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::NotRegistered: return "NotRegistered";
    case ErrorCode::FetchFailed: return "FetchFailed";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::OverlapError: return "OverlapError";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::BadResponse: return "BadResponse";
    case ErrorCode::HttpStatus: return "HttpStatus";
  }
  return "UnknownError";
}

class BenchError : public std::runtime_error {
 public:
  BenchError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the engine when a primitive fails during fit or detect; keeps
// the offending primitive and stage so benchmark records can report them.
class PrimitiveError : public BenchError {
 public:
  PrimitiveError(std::string primitive, std::string stage, const std::string& message)
      : BenchError(ErrorCode::PrimitiveError, primitive + " (" + stage + "): " + message),
        primitive_(std::move(primitive)),
        stage_(std::move(stage)) {}

  const std::string& primitive() const noexcept { return primitive_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string primitive_;
  std::string stage_;
};

}  // namespace tsadbench
