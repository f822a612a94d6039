#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sketchcv {

enum class ErrorCode {
  InvalidArgument,
  InvalidParams,
  SingularSystem,
  SingularMatrix,
  InvalidAngle,
  DimensionMismatch,
  KTooSmall,
  ZeroDenominator,
  TooFewSamples,
  InsufficientPoints,
  Parse,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for every precondition or numerical failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the ratio (Bekas) trace estimators when a slot's denominator vanishes.
class ZeroDenominatorError : public Error {
 public:
  ZeroDenominatorError(std::size_t slot, const std::string& what)
      : Error(ErrorCode::ZeroDenominator, what), slot_(slot) {}

  std::size_t slot() const noexcept { return slot_; }

 private:
  std::size_t slot_;
};

}  // namespace sketchcv
