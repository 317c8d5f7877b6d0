#include "trustfuse/evidence.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "trustfuse/error.hpp"

namespace trustfuse {
namespace {

constexpr double kPartsTolerance = 1e-9;

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorKind::kInvalidInput,
                  std::string(what) + " entry " + std::to_string(i) +
                      " is not finite");
    }
  }
}

}  // namespace

Logits::Logits(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw Error(ErrorKind::kInvalidInput,
                "logits need at least two classes, got " +
                    std::to_string(values_.size()));
  }
  require_finite(values_, "logit");
}

Evidence::Evidence(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw Error(ErrorKind::kInvalidEvidence,
                "evidence needs at least two classes");
  }
  for (std::size_t c = 0; c < values_.size(); ++c) {
    if (!std::isfinite(values_[c]) || values_[c] < 1.0) {
      throw Error(ErrorKind::kInvalidEvidence,
                  "evidence entry " + std::to_string(c) + " = " +
                      std::to_string(values_[c]) + " is below 1");
    }
  }
}

double Evidence::total() const noexcept {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

Opinion Opinion::vacuous(std::size_t num_classes) {
  if (num_classes < 2) {
    throw Error(ErrorKind::kInvalidInput, "opinion needs at least two classes");
  }
  return Opinion(std::vector<double>(num_classes, 0.0), 1.0);
}

Opinion Opinion::from_parts(std::vector<double> beliefs, double uncertainty) {
  if (beliefs.size() < 2) {
    throw Error(ErrorKind::kInvalidOpinion, "opinion needs at least two classes");
  }
  double sum = uncertainty;
  for (std::size_t c = 0; c < beliefs.size(); ++c) {
    if (!std::isfinite(beliefs[c]) || beliefs[c] < 0.0) {
      throw Error(ErrorKind::kInvalidOpinion,
                  "belief " + std::to_string(c) + " is negative or not finite");
    }
    sum += beliefs[c];
  }
  if (!std::isfinite(uncertainty) || uncertainty < 0.0) {
    throw Error(ErrorKind::kInvalidOpinion,
                "uncertainty is negative or not finite");
  }
  if (std::abs(sum - 1.0) > kPartsTolerance) {
    throw Error(ErrorKind::kNotNormalized,
                "masses sum to " + std::to_string(sum));
  }
  return normalized(std::move(beliefs), uncertainty);
}

Opinion Opinion::normalized(std::vector<double> beliefs, double uncertainty) {
  double sum = uncertainty;
  for (double b : beliefs) {
    if (!(b >= 0.0)) {
      throw Error(ErrorKind::kInvalidOpinion, "negative belief mass");
    }
    sum += b;
  }
  if (!(uncertainty >= 0.0) || !(sum > 0.0) || !std::isfinite(sum)) {
    throw Error(ErrorKind::kInvalidOpinion, "masses cannot be normalized");
  }
  for (double& b : beliefs) b /= sum;
  return Opinion(std::move(beliefs), uncertainty / sum);
}

double Opinion::normalization_error() const noexcept {
  double sum = uncertainty_;
  for (double b : beliefs_) sum += b;
  return std::abs(sum - 1.0);
}

double softplus(double x) noexcept {
  if (x > kSoftplusLinearCutoff) return x;
  if (x < -kSoftplusLinearCutoff) return std::exp(x);
  return std::log1p(std::exp(x));
}

double softplus_derivative(double x) noexcept {
  if (x > kSoftplusLinearCutoff) return 1.0;
  if (x < -kSoftplusLinearCutoff) return std::exp(x);
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double ex = std::exp(x);
  return ex / (1.0 + ex);
}

Evidence evidence_from_logits(const Logits& logits) {
  std::vector<double> e(logits.num_classes());
  for (std::size_t c = 0; c < e.size(); ++c) e[c] = softplus(logits[c]) + 1.0;
  return Evidence(std::move(e));
}

Opinion opinion_from_evidence(const Evidence& evidence) {
  const double total = evidence.total();
  const std::size_t num_classes = evidence.num_classes();
  std::vector<double> beliefs(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    beliefs[c] = (evidence[c] - 1.0) / total;
  }
  return Opinion(std::move(beliefs), static_cast<double>(num_classes) / total);
}

std::size_t predicted_class(const Opinion& opinion) {
  const auto beliefs = opinion.beliefs();
  std::size_t best = 0;
  for (std::size_t c = 1; c < beliefs.size(); ++c) {
    if (beliefs[c] > beliefs[best]) best = c;
  }
  return best;
}

}  // namespace trustfuse
