#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace benchlite {

enum class Errc {
  InvalidArgument,
  IoError,
  ParseError,
  OutOfRange,
  MissingGroup,
  EmptyGroup,
  DuplicateAttribute,
  DuplicateTarget,
  NoRecognizedAttributes,
  MalformedValue,
  UnitMismatch,
  MixedRuns,
  DuplicateRun,
  InvariantViolation,
  EmptyInventory,
  CoresExceedTarget,
  UnknownTarget,
  AllTargetsFailed,
  RepositoryWriteFailure,
  RaggedData,
  TooFewTargets,
  MixedContainerSizes,
  AllZeroWeights,
  TargetSetMismatch,
  InsufficientData,
  ZeroVariance,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
    case Errc::ParseError: return "ParseError";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::MissingGroup: return "MissingGroup";
    case Errc::EmptyGroup: return "EmptyGroup";
    case Errc::DuplicateAttribute: return "DuplicateAttribute";
    case Errc::DuplicateTarget: return "DuplicateTarget";
    case Errc::NoRecognizedAttributes: return "NoRecognizedAttributes";
    case Errc::MalformedValue: return "MalformedValue";
    case Errc::UnitMismatch: return "UnitMismatch";
    case Errc::MixedRuns: return "MixedRuns";
    case Errc::DuplicateRun: return "DuplicateRun";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::EmptyInventory: return "EmptyInventory";
    case Errc::CoresExceedTarget: return "CoresExceedTarget";
    case Errc::UnknownTarget: return "UnknownTarget";
    case Errc::AllTargetsFailed: return "AllTargetsFailed";
    case Errc::RepositoryWriteFailure: return "RepositoryWriteFailure";
    case Errc::RaggedData: return "RaggedData";
    case Errc::TooFewTargets: return "TooFewTargets";
    case Errc::MixedContainerSizes: return "MixedContainerSizes";
    case Errc::AllZeroWeights: return "AllZeroWeights";
    case Errc::TargetSetMismatch: return "TargetSetMismatch";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::ZeroVariance: return "ZeroVariance";
  }
  return "Unknown";
}

// All library failures surface as this type; code() is stable and is what
// the CLI and the HTTP layer report.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace benchlite
