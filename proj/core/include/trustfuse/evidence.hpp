#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace trustfuse {

// Raw classifier scores for one modality. At least two classes, all finite.
class Logits {
 public:
  explicit Logits(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t num_classes() const noexcept { return values_.size(); }
  double operator[](std::size_t c) const { return values_[c]; }

 private:
  std::vector<double> values_;
};

// Per-class evidence. Every entry is >= 1 (softplus output shifted by one).
class Evidence {
 public:
  explicit Evidence(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t num_classes() const noexcept { return values_.size(); }
  double operator[](std::size_t c) const { return values_[c]; }
  double total() const noexcept;

 private:
  std::vector<double> values_;
};

/// Subjective-logic opinion: one belief mass per class plus an uncertainty
/// mass. All masses are nonnegative and sum to one within 1e-12.
class Opinion {
 public:
  /// Beliefs all zero, uncertainty one. Identity element of fusion.
  static Opinion vacuous(std::size_t num_classes);

  /// Validating constructor for externally supplied masses. The masses must
  /// already sum to one within 1e-9; the residual is then removed.
  static Opinion from_parts(std::vector<double> beliefs, double uncertainty);

  /// Scales arbitrary nonnegative masses so that they sum to one. Used after
  /// fusion to pin the normalization invariant.
  static Opinion normalized(std::vector<double> beliefs, double uncertainty);

  std::span<const double> beliefs() const noexcept { return beliefs_; }
  double belief(std::size_t c) const { return beliefs_[c]; }
  double uncertainty() const noexcept { return uncertainty_; }
  std::size_t num_classes() const noexcept { return beliefs_.size(); }

  /// |sum(beliefs) + uncertainty - 1|
  double normalization_error() const noexcept;

 private:
  Opinion(std::vector<double> beliefs, double uncertainty)
      : beliefs_(std::move(beliefs)), uncertainty_(uncertainty) {}

  friend Opinion opinion_from_evidence(const Evidence& evidence);

  std::vector<double> beliefs_;
  double uncertainty_;
};

inline constexpr double kSoftplusLinearCutoff = 30.0;

/// Overflow-safe ln(1 + e^x).
double softplus(double x) noexcept;

/// d softplus / dx, i.e. the logistic sigmoid, in the form matching softplus.
double softplus_derivative(double x) noexcept;

/// e_c = softplus(logit_c) + 1
Evidence evidence_from_logits(const Logits& logits);

/// b_c = (e_c - 1) / S and u = C / S with S the evidence total.
Opinion opinion_from_evidence(const Evidence& evidence);

inline Opinion opinion_from_logits(const Logits& logits) {
  return opinion_from_evidence(evidence_from_logits(logits));
}

/// Argmax over beliefs; ties go to the lowest class index.
std::size_t predicted_class(const Opinion& opinion);

}  // namespace trustfuse
