#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace trustfuse {

struct TrustedPrediction {
  std::size_t predicted_class = 0;
  std::size_t true_class = 0;
  double uncertainty = 1.0;

  bool correct() const noexcept { return predicted_class == true_class; }
};

enum class TrustCell { kHT, kLT, kHF, kLF };

/// Counts of (high | low confidence) x (true | false classification).
struct TrustedConfusion {
  std::size_t ht = 0;
  std::size_t lt = 0;
  std::size_t hf = 0;
  std::size_t lf = 0;
  std::size_t n = 0;
};

// Ratios with an empty denominator are reported as std::nullopt.
using MaybeRatio = std::optional<double>;

/// High confidence iff uncertainty <= cutoff.
TrustCell classify_trust(const TrustedPrediction& p, double uncertainty_cutoff);

TrustedConfusion confusion(std::span<const TrustedPrediction> predictions,
                           double uncertainty_cutoff);

/// HT / (HT + HF)
MaybeRatio trusted_precision(const TrustedConfusion& c);
/// HT / (HT + LT)
MaybeRatio trusted_recall(const TrustedConfusion& c);
/// Harmonic mean; zero when both inputs are zero.
MaybeRatio trusted_f1(MaybeRatio precision, MaybeRatio recall);
/// Same ratio as trusted_precision, under the name used in result tables.
MaybeRatio trusted_accuracy(const TrustedConfusion& c);

struct PlainMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
};

/// Uncertainty-blind accuracy and F1. Macro and weighted averages run over
/// the classes that occur as a true or predicted label.
PlainMetrics plain_metrics(std::span<const TrustedPrediction> predictions);

struct PRPoint {
  double threshold = 0.0;
  double trusted_recall = 0.0;
  double trusted_precision = 0.0;  // 0 when undefined
  bool precision_defined = false;
};

struct PRCurve {
  std::vector<PRPoint> points;  // strictly increasing thresholds
};

/// Candidate cutoffs: 0, 1 and the midpoints between consecutive distinct
/// uncertainty values, in increasing order.
std::vector<double> candidate_cutoffs(
    std::span<const TrustedPrediction> predictions);

PRCurve pr_curve(std::span<const TrustedPrediction> predictions);

/// Cutoff whose point is closest to the TP = TR diagonal; ties go to the
/// smaller cutoff. Points with TR = 0 (no high-confidence correct
/// predictions) are skipped while any other defined point exists.
double select_threshold(const PRCurve& curve);

}  // namespace trustfuse
