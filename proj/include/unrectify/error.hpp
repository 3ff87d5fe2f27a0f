#pragma once

#include <stdexcept>
#include <string>

namespace unrectify {

enum class ErrorCode {
  kCycleCreated,
  kCycleDetected,
  kDimMismatch,
  kUnknownNode,
  kUnreachable,
  kInvalidGraph,
  kNotFrozen,
  kTransformInSubgraph,
  kTransformPresent,
  kLevelOutOfRange,
  kNotInSubgraph,
  kNonFinite,
  kUnscalable,
  kDegeneratePair,
  kShapeError,
  kParseError,
  kMissingWeights,
  kInvalidArgument,
  kIoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCycleCreated: return "CycleCreated";
    case ErrorCode::kCycleDetected: return "CycleDetected";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kUnknownNode: return "UnknownNode";
    case ErrorCode::kUnreachable: return "Unreachable";
    case ErrorCode::kInvalidGraph: return "InvalidGraph";
    case ErrorCode::kNotFrozen: return "NotFrozen";
    case ErrorCode::kTransformInSubgraph: return "TransformInSubgraph";
    case ErrorCode::kTransformPresent: return "TransformPresent";
    case ErrorCode::kLevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::kNotInSubgraph: return "NotInSubgraph";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kUnscalable: return "Unscalable";
    case ErrorCode::kDegeneratePair: return "DegeneratePair";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMissingWeights: return "MissingWeights";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace unrectify
