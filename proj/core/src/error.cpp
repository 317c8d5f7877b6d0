#include "trustfuse/error.hpp"

namespace trustfuse {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "InvalidInput";
    case ErrorKind::kInvalidEvidence: return "InvalidEvidence";
    case ErrorKind::kInvalidOpinion: return "InvalidOpinion";
    case ErrorKind::kNotNormalized: return "NotNormalized";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kTotalConflict: return "TotalConflict";
    case ErrorKind::kInvalidLabel: return "InvalidLabel";
    case ErrorKind::kNoCorrectPredictions: return "NoCorrectPredictions";
    case ErrorKind::kNoValidThreshold: return "NoValidThreshold";
    case ErrorKind::kTrainingDiverged: return "TrainingDiverged";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kSchemaError: return "SchemaError";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kMissingLabels: return "MissingLabels";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what),
      kind_(kind) {}

}  // namespace trustfuse
