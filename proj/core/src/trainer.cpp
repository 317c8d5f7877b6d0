#include "trustfuse/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "trustfuse/error.hpp"
#include "trustfuse/fusion.hpp"

namespace trustfuse {
namespace {

constexpr double kInitScale = 0.01;
constexpr double kTrainFraction = 0.8;
// Offsets keep the random streams of different purposes apart.
constexpr std::uint64_t kAudioStreamOffset = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kNoiseStreamOffset = 0xbf58476d1ce4e5b9ULL;

std::vector<std::vector<double>> class_means(const SyntheticConfig& config,
                                             std::mt19937_64& rng) {
  std::vector<std::vector<double>> means(
      config.classes, std::vector<double>(config.feature_dim, 0.0));
  if (config.classes <= config.feature_dim) {
    for (std::size_t c = 0; c < config.classes; ++c) {
      means[c][c] = config.class_separation;
    }
    return means;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& m : means) {
    double norm = 0.0;
    while (norm == 0.0) {
      for (double& x : m) x = normal(rng);
      norm = std::sqrt(std::inner_product(m.begin(), m.end(), m.begin(), 0.0));
    }
    for (double& x : m) x *= config.class_separation / norm;
  }
  return means;
}

struct Gradients {
  std::vector<double> video_w, video_b, audio_w, audio_b;
};

void accumulate_head(const ModalityHead& head, std::span<const double> x,
                     std::span<const double> g_logits, std::vector<double>& gw,
                     std::vector<double>& gb) {
  for (std::size_t i = 0; i < head.feature_dim; ++i) {
    for (std::size_t c = 0; c < head.classes; ++c) {
      gw[i * head.classes + c] += x[i] * g_logits[c];
    }
  }
  for (std::size_t c = 0; c < head.classes; ++c) gb[c] += g_logits[c];
}

void apply_step(std::vector<double>& params, const std::vector<double>& grad,
                double step) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= step * grad[i];
}

void require_normalized(const Opinion& o, std::size_t epoch) {
  if (o.normalization_error() > 1e-12) {
    throw Error(ErrorKind::kInvalidOpinion,
                "opinion lost normalization in epoch " + std::to_string(epoch));
  }
}

double mean_uncertainty(std::span<const TrustedPrediction> p) {
  double sum = 0.0;
  for (const auto& x : p) sum += x.uncertainty;
  return sum / static_cast<double>(p.size());
}

TrustedPrediction as_prediction(const Opinion& o, std::size_t label) {
  return TrustedPrediction{predicted_class(o), label, o.uncertainty()};
}

}  // namespace

void SyntheticConfig::validate() const {
  if (classes < 2) {
    throw Error(ErrorKind::kConfigError, "synthetic.classes must be >= 2");
  }
  if (feature_dim < 1) {
    throw Error(ErrorKind::kConfigError, "synthetic.feature_dim must be >= 1");
  }
  if (samples_per_class < 1) {
    throw Error(ErrorKind::kConfigError,
                "synthetic.samples_per_class must be >= 1");
  }
  if (!(video_noise >= 0.0) || !std::isfinite(video_noise)) {
    throw Error(ErrorKind::kConfigError, "synthetic.video_noise must be >= 0");
  }
  if (!(audio_noise >= 0.0) || !std::isfinite(audio_noise)) {
    throw Error(ErrorKind::kConfigError, "synthetic.audio_noise must be >= 0");
  }
  if (!(class_separation > 0.0) || !std::isfinite(class_separation)) {
    throw Error(ErrorKind::kConfigError,
                "synthetic.class_separation must be > 0");
  }
}

void TrainConfig::validate() const {
  // A zero rate is accepted so that the update path can be checked to be
  // inert; negative rates are rejected.
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::kConfigError, "train.learning_rate must be >= 0");
  }
  if (epochs < 1) {
    throw Error(ErrorKind::kConfigError, "train.epochs must be >= 1");
  }
  if (!(target_uncertainty >= 0.0 && target_uncertainty < 1.0)) {
    throw Error(ErrorKind::kConfigError,
                "train.target_uncertainty must lie in [0, 1)");
  }
}

Dataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const auto video_means = class_means(config, rng);
  std::mt19937_64 audio_rng(config.seed ^ kAudioStreamOffset);
  const auto audio_means = class_means(config, audio_rng);

  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset data{config.classes, config.feature_dim, {}};
  data.samples.reserve(config.classes * config.samples_per_class);
  for (std::size_t c = 0; c < config.classes; ++c) {
    for (std::size_t s = 0; s < config.samples_per_class; ++s) {
      Sample sample{video_means[c], audio_means[c], c};
      for (double& x : sample.video) x += config.video_noise * normal(rng);
      for (double& x : sample.audio) x += config.audio_noise * normal(rng);
      data.samples.push_back(std::move(sample));
    }
  }
  return data;
}

Split split_dataset(const Dataset& data, std::uint64_t seed) {
  std::vector<std::size_t> order(data.samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto cut = static_cast<std::size_t>(
      std::llround(kTrainFraction * static_cast<double>(order.size())));

  Split split{{data.classes, data.feature_dim, {}},
              {data.classes, data.feature_dim, {}}};
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& dst = i < cut ? split.train : split.eval;
    dst.samples.push_back(data.samples[order[i]]);
  }
  return split;
}

Logits ModalityHead::logits(std::span<const double> features) const {
  if (features.size() != feature_dim) {
    throw Error(ErrorKind::kDimensionMismatch,
                "expected " + std::to_string(feature_dim) + " features, got " +
                    std::to_string(features.size()));
  }
  std::vector<double> z(bias);
  for (std::size_t i = 0; i < feature_dim; ++i) {
    for (std::size_t c = 0; c < classes; ++c) {
      z[c] += weights[i * classes + c] * features[i];
    }
  }
  return Logits(std::move(z));
}

TwoModalityModel initial_model(std::size_t feature_dim, std::size_t classes,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, kInitScale);
  auto make = [&] {
    ModalityHead h{feature_dim, classes,
                   std::vector<double>(feature_dim * classes),
                   std::vector<double>(classes, 0.0)};
    for (double& w : h.weights) w = normal(rng);
    return h;
  };
  ModalityHead video = make();
  ModalityHead audio = make();
  return TwoModalityModel{std::move(video), std::move(audio)};
}

ForwardResult forward(const TwoModalityModel& model, const Sample& sample) {
  Opinion video = opinion_from_logits(model.video.logits(sample.video));
  Opinion audio = opinion_from_logits(model.audio.logits(sample.audio));
  Opinion fused = combine_pair(video, audio);
  return ForwardResult{std::move(video), std::move(audio), std::move(fused)};
}

TrainResult train(const Dataset& data, const TrainConfig& config,
                  LossKind kind) {
  return train_from(data, config,
                    initial_model(data.feature_dim, data.classes, config.seed),
                    kind);
}

TrainResult train_from(const Dataset& data, const TrainConfig& config,
                       TwoModalityModel model, LossKind kind) {
  config.validate();
  if (data.samples.empty()) {
    throw Error(ErrorKind::kInvalidInput, "cannot train on an empty dataset");
  }
  const auto n = static_cast<double>(data.samples.size());
  std::vector<TrustedTarget> targets;
  targets.reserve(data.samples.size());
  for (const auto& s : data.samples) {
    targets.push_back(
        one_hot_target(s.label, data.classes, config.target_uncertainty));
  }

  TrainHistory history;
  history.epochs.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Gradients g{std::vector<double>(model.video.weights.size(), 0.0),
                std::vector<double>(model.video.bias.size(), 0.0),
                std::vector<double>(model.audio.weights.size(), 0.0),
                std::vector<double>(model.audio.bias.size(), 0.0)};
    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
      const Sample& s = data.samples[i];
      const auto fb = [&] {
        try {
          const Logits logits[] = {model.video.logits(s.video),
                                   model.audio.logits(s.audio)};
          return overall_loss_and_gradient(logits, targets[i], kind);
        } catch (const Error& e) {
          // Non-finite logits can only come from blown-up parameters.
          if (e.kind() != ErrorKind::kInvalidInput || epoch == 0) throw;
          throw Error(ErrorKind::kTrainingDiverged,
                      "epoch " + std::to_string(epoch) + ": " + e.what());
        }
      }();
      if (i == 0) {
        for (const auto& o : fb.modality_opinions) require_normalized(o, epoch);
        require_normalized(fb.fused, epoch);
      }
      rec.overall_loss += fb.overall;
      rec.video_loss += fb.branch_losses[0];
      rec.audio_loss += fb.branch_losses[1];
      rec.fused_loss += fb.fused_loss;
      rec.mean_fused_uncertainty += fb.fused.uncertainty();
      if (predicted_class(fb.fused) == s.label) ++correct;
      accumulate_head(model.video, s.video, fb.logit_gradients[0], g.video_w,
                      g.video_b);
      accumulate_head(model.audio, s.audio, fb.logit_gradients[1], g.audio_w,
                      g.audio_b);
    }
    rec.overall_loss /= n;
    rec.video_loss /= n;
    rec.audio_loss /= n;
    rec.fused_loss /= n;
    rec.mean_fused_uncertainty /= n;
    rec.accuracy = static_cast<double>(correct) / n;
    if (!std::isfinite(rec.overall_loss)) {
      throw Error(ErrorKind::kTrainingDiverged,
                  "non-finite loss in epoch " + std::to_string(epoch));
    }
    history.epochs.push_back(rec);

    const double step = config.learning_rate / n;
    apply_step(model.video.weights, g.video_w, step);
    apply_step(model.video.bias, g.video_b, step);
    apply_step(model.audio.weights, g.audio_w, step);
    apply_step(model.audio.bias, g.audio_b, step);
  }
  return TrainResult{std::move(model), std::move(history)};
}

SourcePredictions predict(const TwoModalityModel& model, const Dataset& data) {
  SourcePredictions out;
  for (const auto& s : data.samples) {
    const auto r = forward(model, s);
    out.video.push_back(as_prediction(r.video, s.label));
    out.audio.push_back(as_prediction(r.audio, s.label));
    out.fused.push_back(as_prediction(r.fused, s.label));
  }
  return out;
}

AblationReport run_ablation(const Dataset& data, const TrainConfig& config) {
  const Split split = split_dataset(data, config.seed);
  if (split.eval.samples.empty()) {
    throw Error(ErrorKind::kInvalidInput, "held-out split is empty");
  }
  TrainResult trained = train(split.train, config);
  const auto p = predict(trained.model, split.eval);
  AblationReport out;
  out.history = std::move(trained.history);
  out.report.sources.push_back(evaluate_source("video", p.video, std::nullopt));
  out.report.sources.push_back(evaluate_source("audio", p.audio, std::nullopt));
  out.report.sources.push_back(evaluate_source("fused", p.fused, std::nullopt));
  return out;
}

std::vector<VariantRun> run_loss_comparison(const Dataset& data,
                                            const TrainConfig& config) {
  const Split split = split_dataset(data, config.seed);
  const TwoModalityModel init =
      initial_model(data.feature_dim, data.classes, config.seed);
  std::vector<VariantRun> runs;
  for (LossKind kind : kAllLossKinds) {
    VariantRun run;
    run.kind = kind;
    try {
      TrainResult r = train_from(split.train, config, init, kind);
      run.history = std::move(r.history);
      if (!split.eval.samples.empty()) {
        const auto p = predict(r.model, split.eval);
        run.eval_accuracy = plain_metrics(p.fused).accuracy;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kTrainingDiverged &&
          e.kind() != ErrorKind::kTotalConflict) {
        throw;
      }
      run.diverged = true;
      run.diagnostic = e.what();
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

NoiseLevelResult evaluate_perturbed(const TwoModalityModel& model,
                                    const Dataset& data, double sigma,
                                    std::uint64_t noise_seed) {
  if (data.samples.empty()) {
    throw Error(ErrorKind::kInvalidInput, "nothing to evaluate");
  }
  Dataset noisy = data;
  if (sigma != 0.0) {
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& s : noisy.samples) {
      for (double& x : s.audio) x += sigma * normal(rng);
    }
  }
  const auto p = predict(model, noisy);
  NoiseLevelResult r;
  r.sigma = sigma;
  r.mean_audio_uncertainty = mean_uncertainty(p.audio);
  r.mean_fused_uncertainty = mean_uncertainty(p.fused);
  r.video_accuracy = plain_metrics(p.video).accuracy;
  r.audio_accuracy = plain_metrics(p.audio).accuracy;
  r.fused_accuracy = plain_metrics(p.fused).accuracy;
  return r;
}

std::vector<NoiseLevelResult> run_noise_sweep(
    const SyntheticConfig& synthetic, const TrainConfig& config,
    std::span<const double> noise_levels) {
  if (noise_levels.size() < 3) {
    throw Error(ErrorKind::kInvalidInput, "noise sweep needs >= 3 levels");
  }
  for (double sigma : noise_levels) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
      throw Error(ErrorKind::kInvalidInput, "noise levels must be >= 0");
    }
  }
  const Split split = split_dataset(generate_synthetic(synthetic), config.seed);
  const TrainResult trained = train(split.train, config);
  std::vector<NoiseLevelResult> out;
  for (double sigma : noise_levels) {
    out.push_back(evaluate_perturbed(trained.model, split.eval, sigma,
                                     config.seed ^ kNoiseStreamOffset));
  }
  return out;
}

}  // namespace trustfuse
