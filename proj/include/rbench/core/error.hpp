#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rbench {

enum class ErrorCode {
  // geometry / file ingest
  NonFinite,
  NotOrthonormal,
  ImproperRotation,
  NotUnitQuaternion,
  InvalidBoundingBox,
  Parse,
  Io,
  InvalidArgument,
  // scoring
  MissingObject,
  NonPositiveBaseline,
  EmptyInput,
  InvalidCounts,
  // scene generation
  EmptyCandidateSet,
  InvalidTemplate,
  GenerationExhausted,
  // harness
  MalformedScript,
  UnknownInstance,
  // service
  UnknownContest,
  ContestClosed,
  UnknownSubmission,
  TaskSetMismatch,
  PayloadTooLarge,
  InvalidPayload,
  InvalidTransition,
  EvaluationFailed,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::ImproperRotation: return "ImproperRotation";
    case ErrorCode::NotUnitQuaternion: return "NotUnitQuaternion";
    case ErrorCode::InvalidBoundingBox: return "InvalidBoundingBox";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingObject: return "MissingObject";
    case ErrorCode::NonPositiveBaseline: return "NonPositiveBaseline";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidCounts: return "InvalidCounts";
    case ErrorCode::EmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::InvalidTemplate: return "InvalidTemplate";
    case ErrorCode::GenerationExhausted: return "GenerationExhausted";
    case ErrorCode::MalformedScript: return "MalformedScript";
    case ErrorCode::UnknownInstance: return "UnknownInstance";
    case ErrorCode::UnknownContest: return "UnknownContest";
    case ErrorCode::ContestClosed: return "ContestClosed";
    case ErrorCode::UnknownSubmission: return "UnknownSubmission";
    case ErrorCode::TaskSetMismatch: return "TaskSetMismatch";
    case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::InvalidPayload: return "InvalidPayload";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::EvaluationFailed: return "EvaluationFailed";
  }
  return "Unknown";
}

/// Every failure raised by the library. The code is stable and is what
/// callers (CLI exit codes, HTTP status mapping) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rbench
