#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace moeco {

enum class ErrorCode {
  InsufficientData,
  SchemaMismatch,
  DomainError,
  DegenerateInput,
  Unsolvable,
  DuplicateProgram,
  EmptyRegistry,
  ParseError,
  VersionError,
  PredictionError,
  StateError,
  SpecError,
  IncompleteTrace,
  UsageError,
};

inline std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

// Raised by the runtime predictor; `step` is the pipeline step (1..6) that failed.
class PredictionError : public Error {
 public:
  PredictionError(int step, const std::string& message)
      : Error(ErrorCode::PredictionError, "step " + std::to_string(step) + ": " + message),
        step_(step) {}

  int step() const noexcept { return step_; }

 private:
  int step_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::Unsolvable: return "Unsolvable";
    case ErrorCode::DuplicateProgram: return "DuplicateProgram";
    case ErrorCode::EmptyRegistry: return "EmptyRegistry";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::VersionError: return "VersionError";
    case ErrorCode::PredictionError: return "PredictionError";
    case ErrorCode::StateError: return "StateError";
    case ErrorCode::SpecError: return "SpecError";
    case ErrorCode::IncompleteTrace: return "IncompleteTrace";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

}  // namespace moeco
