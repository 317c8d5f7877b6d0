#include "trustfuse/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "trustfuse/error.hpp"
#include "trustfuse/fusion.hpp"

namespace trustfuse {
namespace {

constexpr double kTargetTolerance = 1e-12;

void require_same_classes(const Opinion& prediction,
                          const TrustedTarget& target) {
  if (prediction.num_classes() != target.num_classes()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "prediction has " + std::to_string(prediction.num_classes()) +
                    " classes, target has " +
                    std::to_string(target.num_classes()));
  }
}

// -t log max(p, eps), with the t == 0 term dropped entirely.
double xlog_term(double t, double p) {
  if (t == 0.0) return 0.0;
  return -t * std::log(std::max(p, kLogEpsilon));
}

double xlog_term_derivative(double t, double p) {
  if (t == 0.0 || p <= kLogEpsilon) return 0.0;
  return -t / p;
}

double plain_ce(const Opinion& prediction, const TrustedTarget& target) {
  double mass = 0.0;
  for (double b : prediction.beliefs()) mass += b;
  const auto n = static_cast<double>(prediction.num_classes());
  double loss = 0.0;
  for (std::size_t c = 0; c < prediction.num_classes(); ++c) {
    const double p = mass > 0.0 ? prediction.belief(c) / mass : 1.0 / n;
    loss += xlog_term(target.belief(c), p);
  }
  return loss;
}

// d plain_ce / d b_j with p_c = b_c / B and B = sum_c b_c.
std::vector<double> plain_ce_gradient(const Opinion& prediction,
                                      const TrustedTarget& target) {
  const std::size_t n = prediction.num_classes();
  std::vector<double> grad(n + 1, 0.0);
  double mass = 0.0;
  for (double b : prediction.beliefs()) mass += b;
  if (!(mass > 0.0)) return grad;
  double active_target = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double t = target.belief(c);
    const double b = prediction.belief(c);
    if (t != 0.0 && b / mass > kLogEpsilon) {
      grad[c] = -t / b;
      active_target += t;
    }
  }
  for (std::size_t c = 0; c < n; ++c) grad[c] += active_target / mass;
  return grad;
}

double tan_argument(double u) {
  return std::min(u * std::numbers::pi / 2.0,
                  std::numbers::pi / 2.0 - kTanMargin);
}

double tan_term(double u) { return std::tan(tan_argument(u)); }

double tan_term_derivative(double u) {
  if (u * std::numbers::pi / 2.0 >= std::numbers::pi / 2.0 - kTanMargin) {
    return 0.0;
  }
  const double c = std::cos(tan_argument(u));
  return (std::numbers::pi / 2.0) / (c * c);
}

}  // namespace

TrustedTarget::TrustedTarget(std::vector<double> beliefs, double uncertainty)
    : beliefs_(std::move(beliefs)), uncertainty_(uncertainty) {
  if (beliefs_.size() < 2) {
    throw Error(ErrorKind::kInvalidInput, "target needs at least two classes");
  }
  double sum = uncertainty_;
  for (double b : beliefs_) {
    if (!(b >= 0.0) || !std::isfinite(b)) {
      throw Error(ErrorKind::kInvalidInput, "target belief is negative");
    }
    sum += b;
  }
  if (!(uncertainty_ >= 0.0) || !std::isfinite(uncertainty_)) {
    throw Error(ErrorKind::kInvalidInput, "target uncertainty is negative");
  }
  if (std::abs(sum - 1.0) > kTargetTolerance) {
    throw Error(ErrorKind::kNotNormalized,
                "target masses sum to " + std::to_string(sum));
  }
}

TrustedTarget one_hot_target(std::size_t label, std::size_t num_classes,
                             double target_uncertainty) {
  if (label >= num_classes) {
    throw Error(ErrorKind::kInvalidLabel,
                "label " + std::to_string(label) + " outside [0, " +
                    std::to_string(num_classes) + ")");
  }
  if (!(target_uncertainty >= 0.0 && target_uncertainty < 1.0)) {
    throw Error(ErrorKind::kInvalidInput,
                "target uncertainty must lie in [0, 1)");
  }
  std::vector<double> beliefs(num_classes, 0.0);
  beliefs[label] = 1.0 - target_uncertainty;
  return TrustedTarget(std::move(beliefs), target_uncertainty);
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kTrustedCE: return "trusted_ce";
    case LossKind::kCE: return "ce";
    case LossKind::kAddTrusted: return "add_trusted";
    case LossKind::kTanMulTrusted: return "tan_mul_trusted";
    case LossKind::kTanAddTrusted: return "tan_add_trusted";
    case LossKind::kExpMulTrusted: return "exp_mul_trusted";
  }
  return "unknown";
}

double trusted_ce(const Opinion& prediction, const TrustedTarget& target) {
  require_same_classes(prediction, target);
  double loss = xlog_term(target.uncertainty(), prediction.uncertainty());
  for (std::size_t c = 0; c < prediction.num_classes(); ++c) {
    loss += xlog_term(target.belief(c), prediction.belief(c));
  }
  return loss;
}

LossBreakdown overall_loss(const Opinion& video, const Opinion& audio,
                           const Opinion& fused, const TrustedTarget& target) {
  LossBreakdown out;
  out.video_loss = trusted_ce(video, target);
  out.audio_loss = trusted_ce(audio, target);
  out.combined_loss = trusted_ce(fused, target);
  out.overall = out.video_loss + out.audio_loss + out.combined_loss;
  return out;
}

double variant_loss(LossKind kind, const Opinion& prediction,
                    const TrustedTarget& target) {
  require_same_classes(prediction, target);
  if (kind == LossKind::kTrustedCE) return trusted_ce(prediction, target);
  const double ce = plain_ce(prediction, target);
  const double u = prediction.uncertainty();
  switch (kind) {
    case LossKind::kCE: return ce;
    case LossKind::kAddTrusted: return ce + u;
    case LossKind::kTanMulTrusted: return ce * tan_term(u);
    case LossKind::kTanAddTrusted: return ce + tan_term(u);
    // Printed as a sum despite the name.
    case LossKind::kExpMulTrusted: return ce + std::exp(u);
    case LossKind::kTrustedCE: break;
  }
  return ce;
}

std::vector<double> variant_loss_gradient(LossKind kind,
                                          const Opinion& prediction,
                                          const TrustedTarget& target) {
  require_same_classes(prediction, target);
  const std::size_t n = prediction.num_classes();
  const double u = prediction.uncertainty();
  if (kind == LossKind::kTrustedCE) {
    std::vector<double> grad(n + 1);
    for (std::size_t c = 0; c < n; ++c) {
      grad[c] = xlog_term_derivative(target.belief(c), prediction.belief(c));
    }
    grad[n] = xlog_term_derivative(target.uncertainty(), u);
    return grad;
  }
  auto grad = plain_ce_gradient(prediction, target);
  switch (kind) {
    case LossKind::kAddTrusted:
      grad[n] += 1.0;
      break;
    case LossKind::kTanMulTrusted: {
      const double scale = tan_term(u);
      for (std::size_t c = 0; c < n; ++c) grad[c] *= scale;
      grad[n] = plain_ce(prediction, target) * tan_term_derivative(u);
      break;
    }
    case LossKind::kTanAddTrusted:
      grad[n] += tan_term_derivative(u);
      break;
    case LossKind::kExpMulTrusted:
      grad[n] += std::exp(u);
      break;
    case LossKind::kCE:
    case LossKind::kTrustedCE:
      break;
  }
  return grad;
}

std::vector<double> backprop_to_logits(const Logits& logits,
                                       std::span<const double> mass_gradient) {
  const std::size_t n = logits.num_classes();
  if (mass_gradient.size() != n + 1) {
    throw Error(ErrorKind::kDimensionMismatch, "mass gradient has wrong size");
  }
  const Evidence evidence = evidence_from_logits(logits);
  const Opinion opinion = opinion_from_evidence(evidence);
  const double total = evidence.total();

  // b_i = (e_i - 1)/S, u = C/S:
  //   d b_i / d e_j = (delta_ij - b_i)/S,  d u / d e_j = -u/S.
  double shared = mass_gradient[n] * opinion.uncertainty();
  for (std::size_t i = 0; i < n; ++i) {
    shared += mass_gradient[i] * opinion.belief(i);
  }
  std::vector<double> grad(n);
  for (std::size_t j = 0; j < n; ++j) {
    grad[j] = (mass_gradient[j] - shared) / total *
              softplus_derivative(logits[j]);
  }
  return grad;
}

ForwardBackward overall_loss_and_gradient(std::span<const Logits> logits,
                                          const TrustedTarget& target,
                                          LossKind kind) {
  if (logits.empty()) {
    throw Error(ErrorKind::kInvalidInput, "no modalities");
  }
  const std::size_t m = logits.size();
  std::vector<Opinion> opinions;
  opinions.reserve(m);
  for (const auto& l : logits) {
    if (l.num_classes() != target.num_classes()) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "logits and target disagree on class count");
    }
    opinions.push_back(opinion_from_logits(l));
  }

  // prefix[i] is the fold of opinions[0..i].
  std::vector<Opinion> prefix;
  prefix.reserve(m);
  prefix.push_back(opinions.front());
  for (std::size_t i = 1; i < m; ++i) {
    prefix.push_back(combine_pair(prefix.back(), opinions[i]));
  }

  std::vector<double> branch_losses(m);
  std::vector<std::vector<double>> mass_grads(m);
  double overall = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    branch_losses[i] = variant_loss(kind, opinions[i], target);
    mass_grads[i] = variant_loss_gradient(kind, opinions[i], target);
    overall += branch_losses[i];
  }
  const double fused_loss = variant_loss(kind, prefix.back(), target);
  overall += fused_loss;

  std::vector<double> carry = variant_loss_gradient(kind, prefix.back(), target);
  for (std::size_t i = m - 1; i >= 1; --i) {
    auto pair = combine_pair_backward(prefix[i - 1], opinions[i], carry);
    for (std::size_t x = 0; x < carry.size(); ++x) {
      mass_grads[i][x] += pair.second[x];
    }
    carry = std::move(pair.first);
  }
  for (std::size_t x = 0; x < carry.size(); ++x) mass_grads[0][x] += carry[x];

  std::vector<std::vector<double>> logit_grads(m);
  for (std::size_t i = 0; i < m; ++i) {
    logit_grads[i] = backprop_to_logits(logits[i], mass_grads[i]);
  }
  Opinion fused = prefix.back();
  return ForwardBackward{std::move(opinions), std::move(fused),
                         std::move(branch_losses), fused_loss, overall,
                         std::move(logit_grads)};
}

std::vector<std::vector<double>> trusted_ce_gradient(
    std::span<const Logits> logits, const TrustedTarget& target) {
  return overall_loss_and_gradient(logits, target, LossKind::kTrustedCE)
      .logit_gradients;
}

}  // namespace trustfuse
