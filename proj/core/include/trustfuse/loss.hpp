#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "trustfuse/evidence.hpp"

namespace trustfuse {

// Floor applied to every log argument.
inline constexpr double kLogEpsilon = 1e-12;
// tan(u * pi/2) is evaluated with its argument capped at pi/2 minus this.
inline constexpr double kTanMargin = 1e-6;

/// Ground truth in opinion form: class beliefs plus a target uncertainty,
/// nonnegative and summing to one.
class TrustedTarget {
 public:
  TrustedTarget(std::vector<double> beliefs, double uncertainty);

  std::span<const double> beliefs() const noexcept { return beliefs_; }
  double belief(std::size_t c) const { return beliefs_[c]; }
  double uncertainty() const noexcept { return uncertainty_; }
  std::size_t num_classes() const noexcept { return beliefs_.size(); }

 private:
  std::vector<double> beliefs_;
  double uncertainty_;
};

/// All mass on `label` except `target_uncertainty`, which goes to the
/// uncertainty slot.
TrustedTarget one_hot_target(std::size_t label, std::size_t num_classes,
                             double target_uncertainty = 0.0);

struct LossBreakdown {
  double video_loss = 0.0;
  double audio_loss = 0.0;
  double combined_loss = 0.0;
  double overall = 0.0;
};

enum class LossKind {
  kTrustedCE,
  kCE,
  kAddTrusted,
  kTanMulTrusted,
  kTanAddTrusted,
  kExpMulTrusted,
};

inline constexpr LossKind kAllLossKinds[] = {
    LossKind::kTrustedCE,     LossKind::kCE,
    LossKind::kAddTrusted,    LossKind::kTanMulTrusted,
    LossKind::kTanAddTrusted, LossKind::kExpMulTrusted,
};

std::string_view to_string(LossKind kind);

/// -sum_c t_c log b_c - t_u log u, with 0 * log(.) = 0.
double trusted_ce(const Opinion& prediction, const TrustedTarget& target);

/// Per-branch trusted cross-entropy and their sum.
LossBreakdown overall_loss(const Opinion& video, const Opinion& audio,
                           const Opinion& fused, const TrustedTarget& target);

/// Ablation losses. CE uses the class beliefs rescaled to a probability
/// vector; the trusted variants add or multiply a term in the predicted
/// uncertainty. kTrustedCE is accepted and forwards to trusted_ce.
double variant_loss(LossKind kind, const Opinion& prediction,
                    const TrustedTarget& target);

/// Gradient of variant_loss with respect to the prediction's masses, laid
/// out as (d/db_0, ..., d/db_{C-1}, d/du). Beliefs and uncertainty are
/// treated as independent variables.
std::vector<double> variant_loss_gradient(LossKind kind,
                                          const Opinion& prediction,
                                          const TrustedTarget& target);

/// Gradient of a scalar with respect to logits, given its gradient with
/// respect to the opinion masses derived from those logits.
std::vector<double> backprop_to_logits(const Logits& logits,
                                       std::span<const double> mass_gradient);

struct ForwardBackward {
  std::vector<Opinion> modality_opinions;
  Opinion fused;
  std::vector<double> branch_losses;  // one per modality
  double fused_loss = 0.0;
  double overall = 0.0;
  std::vector<std::vector<double>> logit_gradients;  // one per modality
};

/// Loss summed over every modality branch plus the fused branch, and its
/// exact gradient with respect to every logit. The fused branch is
/// backpropagated through the left-fold fusion into every modality.
ForwardBackward overall_loss_and_gradient(std::span<const Logits> logits,
                                          const TrustedTarget& target,
                                          LossKind kind = LossKind::kTrustedCE);

/// Gradient of the overall trusted cross-entropy with respect to each
/// modality's logits.
std::vector<std::vector<double>> trusted_ce_gradient(
    std::span<const Logits> logits, const TrustedTarget& target);

}  // namespace trustfuse
