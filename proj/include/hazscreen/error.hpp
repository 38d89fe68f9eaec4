#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hazscreen {

enum class ErrorCode {
  // signal-core
  ZeroVector,
  DimensionMismatch,
  MissingPromptEmbedding,
  NonFiniteValue,
  // temporal metrics
  NoHazardVideos,
  NoNonHazardVideos,
  EmptyCorpus,
  OutOfRange,
  MissingMask,
  // calibration
  InsufficientCorpus,
  EmptySignal,
  MissingCategorySubset,
  // fusion
  MissingGeneralChannel,
  FrameCountMismatch,
  // trajectories
  InvalidTrajectory,
  LengthMismatch,
  TimestampMismatch,
  EmptyInput,
  BadPercentile,
  NoInstructions,
  // ingestion
  ParseError,
  DanglingPath,
  DuplicateVideoId,
  BadMagic,
  UnsupportedVersion,
  TruncatedPayload,
  NonPositiveScale,
  IntervalOutOfRange,
  OrderViolation,
  MissingActiveInterval,
  SchemaVersionMismatch,
  ValidationError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingPromptEmbedding: return "MissingPromptEmbedding";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NoHazardVideos: return "NoHazardVideos";
    case ErrorCode::NoNonHazardVideos: return "NoNonHazardVideos";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::MissingMask: return "MissingMask";
    case ErrorCode::InsufficientCorpus: return "InsufficientCorpus";
    case ErrorCode::EmptySignal: return "EmptySignal";
    case ErrorCode::MissingCategorySubset: return "MissingCategorySubset";
    case ErrorCode::MissingGeneralChannel: return "MissingGeneralChannel";
    case ErrorCode::FrameCountMismatch: return "FrameCountMismatch";
    case ErrorCode::InvalidTrajectory: return "InvalidTrajectory";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TimestampMismatch: return "TimestampMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::BadPercentile: return "BadPercentile";
    case ErrorCode::NoInstructions: return "NoInstructions";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DanglingPath: return "DanglingPath";
    case ErrorCode::DuplicateVideoId: return "DuplicateVideoId";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::IntervalOutOfRange: return "IntervalOutOfRange";
    case ErrorCode::OrderViolation: return "OrderViolation";
    case ErrorCode::MissingActiveInterval: return "MissingActiveInterval";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Process exit status for a failure of the given kind: 3 when the corpus
/// cannot support the requested computation, 4 for I/O failures, 2 otherwise.
constexpr int exit_code(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InsufficientCorpus:
    case ErrorCode::MissingCategorySubset:
    case ErrorCode::NoHazardVideos:
    case ErrorCode::NoNonHazardVideos:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::EmptySignal:
      return 3;
    case ErrorCode::IoError:
      return 4;
    default:
      return 2;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hazscreen
