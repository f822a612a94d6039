#include "sketchcv/error.hpp"

namespace sketchcv {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::InvalidAngle: return "InvalidAngle";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::KTooSmall: return "KTooSmall";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace sketchcv
