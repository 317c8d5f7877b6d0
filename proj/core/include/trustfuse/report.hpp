#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trustfuse/metrics.hpp"

namespace trustfuse {

// One block of an evaluation report: a modality or the fused output.
struct SourceReport {
  std::string name;
  PlainMetrics plain;
  double threshold = 0.0;
  TrustedConfusion cells;
  MaybeRatio trusted_precision;
  MaybeRatio trusted_recall;
  MaybeRatio trusted_accuracy;
  MaybeRatio trusted_f1;
};

struct EvaluationReport {
  std::vector<SourceReport> sources;
};

/// Evaluates one prediction source. Without an explicit cutoff the threshold
/// is chosen on the same predictions via pr_curve and select_threshold.
SourceReport evaluate_source(std::string name,
                             std::span<const TrustedPrediction> predictions,
                             std::optional<double> uncertainty_cutoff);

}  // namespace trustfuse
