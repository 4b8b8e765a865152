#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dewm {

enum class ErrorCode {
  // pixel codec
  OutOfRange,
  NotExpandable,
  NotChangeable,
  // location map
  SelectionMismatch,
  CorruptMap,
  // payload
  FieldTooLong,
  NonFiniteFeature,
  FeatureOutOfRange,
  BadMagic,
  BadVersion,
  CrcMismatch,
  MalformedPayload,
  // features
  EmptyImage,
  ZeroIntensity,
  // pipeline
  InsufficientCapacity,
  DimensionMismatch,
  // vault / retrieval
  UnknownCode,
  EmptyVault,
  UnknownLabel,
  DuplicateRecord,
  // I/O
  Io,
  Format,
};

std::string_view to_string(ErrorCode code) noexcept;

/// All library failures are reported through this exception; `code()`
/// lets callers (the CLI in particular) branch on the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dewm
