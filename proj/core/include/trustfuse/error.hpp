#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trustfuse {

enum class ErrorKind {
  kInvalidInput,
  kInvalidEvidence,
  kInvalidOpinion,
  kNotNormalized,
  kDimensionMismatch,
  kTotalConflict,
  kInvalidLabel,
  kNoCorrectPredictions,
  kNoValidThreshold,
  kTrainingDiverged,
  kParseError,
  kSchemaError,
  kConfigError,
  kMissingLabels,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries one of the kinds above so that
// callers (notably the CLI) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace trustfuse
