#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace arggen {

enum class ErrorCode {
  EmptyDocument,
  ParseError,
  DuplicateId,
  SplitArity,
  InsufficientGold,
  InvalidRecord,
  InvalidLabel,
  ShapeMismatch,
  MissingGoldLabel,
  MissingData,
  TooFewItems,
  EmptyInput,
  UnlabeledSentence,
  MissingRole,
  ReservedToken,
  BudgetTooSmall,
  BudgetViolation,
  BackendUnavailable,
  InvalidRewrite,
  AlreadyReviewed,
  EmptyReference,
  EmptyText,
  MixedRuns,
  StageDependencyError,
  ConfigError,
  LockHeld,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a stable code so the CLI can
// emit a machine-parsable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message),
        line_(line),
        detail_(message) {}

  // 1-based line number in the offending file.
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

}  // namespace arggen
