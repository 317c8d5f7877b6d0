#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trustfuse/evidence.hpp"
#include "trustfuse/loss.hpp"
#include "trustfuse/metrics.hpp"
#include "trustfuse/report.hpp"

namespace trustfuse {

struct SyntheticConfig {
  std::size_t classes = 3;
  std::size_t feature_dim = 4;
  std::size_t samples_per_class = 200;
  double video_noise = 0.5;
  double audio_noise = 0.5;
  double class_separation = 3.0;
  std::uint64_t seed = 42;

  void validate() const;
};

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 200;
  double target_uncertainty = 0.0;
  std::uint64_t seed = 42;

  void validate() const;
};

struct Sample {
  std::vector<double> video;
  std::vector<double> audio;
  std::size_t label = 0;
};

struct Dataset {
  std::size_t classes = 0;
  std::size_t feature_dim = 0;
  std::vector<Sample> samples;
};

/// Two Gaussian modalities per class. When classes <= feature_dim the class
/// means sit on the coordinate axes at distance class_separation from the
/// origin; otherwise they are random directions of that length. Samples are
/// grouped by class.
Dataset generate_synthetic(const SyntheticConfig& config);

struct Split {
  Dataset train;
  Dataset eval;
};

/// Seeded shuffle followed by an 80/20 cut.
Split split_dataset(const Dataset& data, std::uint64_t seed);

/// Linear classifier producing logits = W^T x + b. Weights are stored
/// row-major as feature_dim rows of `classes` entries.
struct ModalityHead {
  std::size_t feature_dim = 0;
  std::size_t classes = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  Logits logits(std::span<const double> features) const;
};

struct TwoModalityModel {
  ModalityHead video;
  ModalityHead audio;
};

/// Small seeded Gaussian initialization shared by every training run with the
/// same seed.
TwoModalityModel initial_model(std::size_t feature_dim, std::size_t classes,
                               std::uint64_t seed);

struct ForwardResult {
  Opinion video;
  Opinion audio;
  Opinion fused;
};

ForwardResult forward(const TwoModalityModel& model, const Sample& sample);

struct EpochRecord {
  std::size_t epoch = 0;
  double overall_loss = 0.0;  // mean over samples of the training objective
  double video_loss = 0.0;
  double audio_loss = 0.0;
  double fused_loss = 0.0;
  double accuracy = 0.0;  // fused argmax on the training data
  double mean_fused_uncertainty = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  TwoModalityModel model;
  TrainHistory history;
};

/// Full-batch gradient descent on the summed branch losses, starting from
/// initial_model(config.seed). Each record describes the parameters before
/// that epoch's update. Throws TrainingDiverged on a non-finite loss.
TrainResult train(const Dataset& data, const TrainConfig& config,
                  LossKind kind = LossKind::kTrustedCE);

/// Same as train() but continues from the given model.
TrainResult train_from(const Dataset& data, const TrainConfig& config,
                       TwoModalityModel model, LossKind kind);

struct SourcePredictions {
  std::vector<TrustedPrediction> video;
  std::vector<TrustedPrediction> audio;
  std::vector<TrustedPrediction> fused;
};

SourcePredictions predict(const TwoModalityModel& model, const Dataset& data);

// Sources are reported in the order video, audio, fused.
struct AblationReport {
  EvaluationReport report;
  TrainHistory history;
};

/// Trains on the 80% split and evaluates each source on the held-out 20%,
/// choosing every source's trusted threshold there.
AblationReport run_ablation(const Dataset& data, const TrainConfig& config);

struct VariantRun {
  LossKind kind = LossKind::kTrustedCE;
  TrainHistory history;
  bool diverged = false;
  std::string diagnostic;
  double eval_accuracy = 0.0;  // fused accuracy on the held-out split
};

/// One training run per loss kind, all from the same initialization.
std::vector<VariantRun> run_loss_comparison(const Dataset& data,
                                            const TrainConfig& config);

struct NoiseLevelResult {
  double sigma = 0.0;
  double mean_audio_uncertainty = 0.0;
  double mean_fused_uncertainty = 0.0;
  double video_accuracy = 0.0;
  double audio_accuracy = 0.0;
  double fused_accuracy = 0.0;
};

/// Evaluates a trained model after adding sigma * N(0, 1) noise, drawn from
/// noise_seed, to every audio feature. sigma = 0 leaves the data untouched.
NoiseLevelResult evaluate_perturbed(const TwoModalityModel& model,
                                    const Dataset& data, double sigma,
                                    std::uint64_t noise_seed);

/// Trains once on the clean training split, then evaluates the held-out
/// split with Gaussian noise of each level added to the audio features.
/// The same noise draw is scaled across levels.
std::vector<NoiseLevelResult> run_noise_sweep(
    const SyntheticConfig& synthetic, const TrainConfig& config,
    std::span<const double> noise_levels);

}  // namespace trustfuse
