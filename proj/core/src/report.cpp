#include "trustfuse/report.hpp"

namespace trustfuse {

SourceReport evaluate_source(std::string name,
                             std::span<const TrustedPrediction> predictions,
                             std::optional<double> uncertainty_cutoff) {
  SourceReport r;
  r.name = std::move(name);
  r.plain = plain_metrics(predictions);
  r.threshold = uncertainty_cutoff
                    ? *uncertainty_cutoff
                    : select_threshold(pr_curve(predictions));
  r.cells = confusion(predictions, r.threshold);
  r.trusted_precision = trusted_precision(r.cells);
  r.trusted_recall = trusted_recall(r.cells);
  r.trusted_accuracy = trusted_accuracy(r.cells);
  r.trusted_f1 = trusted_f1(r.trusted_precision, r.trusted_recall);
  return r;
}

}  // namespace trustfuse
