#include "aamsupcon/errors.hpp"

namespace aamsupcon {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidMargin: return "InvalidMargin";
    case ErrorCode::kInvalidScale: return "InvalidScale";
    case ErrorCode::kInvalidTemperature: return "InvalidTemperature";
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kBatchTooSmall: return "BatchTooSmall";
    case ErrorCode::kAnchorWithoutPositive: return "AnchorWithoutPositive";
    case ErrorCode::kAlreadyAugmented: return "AlreadyAugmented";
    case ErrorCode::kInsufficientSpeakers: return "InsufficientSpeakers";
    case ErrorCode::kInsufficientUtterances: return "InsufficientUtterances";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kTraceMismatch: return "TraceMismatch";
    case ErrorCode::kInvalidDims: return "InvalidDims";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kDivergenceDetected: return "DivergenceDetected";
    case ErrorCode::kDegenerateTrials: return "DegenerateTrials";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kCheckpointError: return "CheckpointError";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kToleranceExceeded: return "ToleranceExceeded";
  }
  return "UnknownError";
}

}  // namespace aamsupcon
