#include "trustfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "trustfuse/error.hpp"

namespace trustfuse {
namespace {

MaybeRatio ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

TrustCell classify_trust(const TrustedPrediction& p,
                         double uncertainty_cutoff) {
  const bool high = p.uncertainty <= uncertainty_cutoff;
  if (p.correct()) return high ? TrustCell::kHT : TrustCell::kLT;
  return high ? TrustCell::kHF : TrustCell::kLF;
}

TrustedConfusion confusion(std::span<const TrustedPrediction> predictions,
                           double uncertainty_cutoff) {
  if (predictions.empty()) {
    throw Error(ErrorKind::kInvalidInput, "confusion over zero predictions");
  }
  TrustedConfusion c;
  for (const auto& p : predictions) {
    switch (classify_trust(p, uncertainty_cutoff)) {
      case TrustCell::kHT: ++c.ht; break;
      case TrustCell::kLT: ++c.lt; break;
      case TrustCell::kHF: ++c.hf; break;
      case TrustCell::kLF: ++c.lf; break;
    }
  }
  c.n = predictions.size();
  return c;
}

MaybeRatio trusted_precision(const TrustedConfusion& c) {
  return ratio(c.ht, c.ht + c.hf);
}

MaybeRatio trusted_recall(const TrustedConfusion& c) {
  return ratio(c.ht, c.ht + c.lt);
}

MaybeRatio trusted_f1(MaybeRatio precision, MaybeRatio recall) {
  if (!precision || !recall) return std::nullopt;
  const double sum = *precision + *recall;
  if (sum == 0.0) return 0.0;
  return 2.0 * (*precision * *recall) / sum;
}

MaybeRatio trusted_accuracy(const TrustedConfusion& c) {
  return ratio(c.ht, c.ht + c.hf);
}

PlainMetrics plain_metrics(std::span<const TrustedPrediction> predictions) {
  if (predictions.empty()) {
    throw Error(ErrorKind::kInvalidInput, "metrics over zero predictions");
  }
  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0, support = 0;
  };
  std::map<std::size_t, Counts> per_class;
  std::size_t correct = 0;
  for (const auto& p : predictions) {
    ++per_class[p.true_class].support;
    if (p.correct()) {
      ++correct;
      ++per_class[p.true_class].tp;
    } else {
      ++per_class[p.true_class].fn;
      ++per_class[p.predicted_class].fp;
    }
  }
  const auto n = static_cast<double>(predictions.size());
  PlainMetrics out;
  out.accuracy = static_cast<double>(correct) / n;
  for (const auto& [cls, k] : per_class) {
    const std::size_t den = 2 * k.tp + k.fp + k.fn;
    const double f1 = den == 0 ? 0.0 : 2.0 * static_cast<double>(k.tp) / den;
    out.macro_f1 += f1;
    out.weighted_f1 += f1 * static_cast<double>(k.support) / n;
  }
  out.macro_f1 /= static_cast<double>(per_class.size());
  return out;
}

std::vector<double> candidate_cutoffs(
    std::span<const TrustedPrediction> predictions) {
  std::vector<double> u;
  u.reserve(predictions.size());
  for (const auto& p : predictions) u.push_back(p.uncertainty);
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());

  std::vector<double> cutoffs{0.0};
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    cutoffs.push_back(0.5 * (u[i] + u[i + 1]));
  }
  cutoffs.push_back(1.0);
  std::sort(cutoffs.begin(), cutoffs.end());
  cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());
  return cutoffs;
}

PRCurve pr_curve(std::span<const TrustedPrediction> predictions) {
  if (predictions.empty()) {
    throw Error(ErrorKind::kInvalidInput, "P-R curve over zero predictions");
  }
  if (std::none_of(predictions.begin(), predictions.end(),
                   [](const auto& p) { return p.correct(); })) {
    throw Error(ErrorKind::kNoCorrectPredictions,
                "trusted recall is undefined without correct predictions");
  }
  PRCurve curve;
  for (double cutoff : candidate_cutoffs(predictions)) {
    const auto c = confusion(predictions, cutoff);
    const auto precision = trusted_precision(c);
    curve.points.push_back(PRPoint{cutoff, *trusted_recall(c),
                                   precision.value_or(0.0),
                                   precision.has_value()});
  }
  return curve;
}

double select_threshold(const PRCurve& curve) {
  // A point with TR = 0 has HT = 0 and so touches the diagonal only at the
  // origin; it is used only when no other defined point exists.
  const bool has_nondegenerate =
      std::any_of(curve.points.begin(), curve.points.end(), [](const auto& p) {
        return p.precision_defined && p.trusted_recall > 0.0;
      });
  std::optional<double> best_cutoff;
  double best_gap = 0.0;
  for (const auto& p : curve.points) {
    if (!p.precision_defined) continue;
    if (has_nondegenerate && p.trusted_recall == 0.0) continue;
    const double gap = std::abs(p.trusted_precision - p.trusted_recall);
    if (!best_cutoff || gap < best_gap ||
        (gap == best_gap && p.threshold < *best_cutoff)) {
      best_cutoff = p.threshold;
      best_gap = gap;
    }
  }
  if (!best_cutoff) {
    throw Error(ErrorKind::kNoValidThreshold,
                "no point of the curve has a defined trusted precision");
  }
  return *best_cutoff;
}

}  // namespace trustfuse
