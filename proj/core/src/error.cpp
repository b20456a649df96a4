#include "arggen/error.hpp"

namespace arggen {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::SplitArity: return "SplitArity";
    case ErrorCode::InsufficientGold: return "InsufficientGold";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MissingGoldLabel: return "MissingGoldLabel";
    case ErrorCode::MissingData: return "MissingData";
    case ErrorCode::TooFewItems: return "TooFewItems";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UnlabeledSentence: return "UnlabeledSentence";
    case ErrorCode::MissingRole: return "MissingRole";
    case ErrorCode::ReservedToken: return "ReservedToken";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::BudgetViolation: return "BudgetViolation";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::InvalidRewrite: return "InvalidRewrite";
    case ErrorCode::AlreadyReviewed: return "AlreadyReviewed";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::MixedRuns: return "MixedRuns";
    case ErrorCode::StageDependencyError: return "StageDependencyError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::LockHeld: return "LockHeld";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace arggen
