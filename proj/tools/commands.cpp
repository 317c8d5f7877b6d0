#include "commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "trustfuse/error.hpp"
#include "trustfuse/io.hpp"
#include "trustfuse/metrics.hpp"
#include "trustfuse/report.hpp"
#include "trustfuse/trainer.hpp"

namespace trustfuse::cli {
namespace {

namespace fs = std::filesystem;
using io::Json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::kInvalidInput, "cannot write " + path.string());
  }
  return out;
}

void write_json(const fs::path& path, const Json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

io::ExperimentConfig load_config(const std::string& path,
                                 std::optional<std::uint64_t> seed) {
  auto config = io::load_config(path);
  if (seed) {
    config.synthetic.seed = *seed;
    config.train.seed = *seed;
  }
  return config;
}

Json head_json(const ModalityHead& h) {
  return Json{{"feature_dim", h.feature_dim},
              {"classes", h.classes},
              {"weights", h.weights},
              {"bias", h.bias}};
}

int cmd_fuse(const std::string& input, const std::string& output,
             std::ostream& err) {
  const auto records = io::read_records(input);
  auto out = open_output(output);
  std::size_t conflicts = 0;
  for (const auto& r : records) {
    const auto fused = io::fuse_record(r);
    if (fused.error) ++conflicts;
    out << io::to_json(fused).dump() << '\n';
  }
  if (conflicts > 0) {
    err << conflicts << " record(s) could not be fused (total conflict)\n";
  }
  return kExitOk;
}

std::optional<double> parse_threshold(const std::string& text) {
  if (text == "auto") return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !(v >= 0.0 && v <= 1.0)) {
    throw UsageError("--threshold must be \"auto\" or a number in [0, 1]");
  }
  return v;
}

int cmd_eval(const std::string& input, const std::string& output,
             const std::string& threshold_text, const std::string& curve_path,
             std::ostream& out) {
  const auto cutoff = parse_threshold(threshold_text);
  const auto records = io::read_records(input);
  if (records.empty()) {
    throw Error(ErrorKind::kInvalidInput, "no records to evaluate");
  }

  std::vector<std::string> order;
  std::map<std::string, std::vector<TrustedPrediction>> by_source;
  std::vector<TrustedPrediction> fused;
  std::size_t skipped = 0;
  for (const auto& r : records) {
    if (!r.label) {
      throw Error(ErrorKind::kMissingLabels,
                  "record \"" + r.id + "\" has no label");
    }
    const auto f = io::fuse_record(r);
    for (const auto& [name, o] : f.modalities) {
      if (!by_source.count(name)) order.push_back(name);
      by_source[name].push_back(
          TrustedPrediction{predicted_class(o), *r.label, o.uncertainty()});
    }
    if (f.fused) {
      fused.push_back(TrustedPrediction{predicted_class(*f.fused), *r.label,
                                        f.fused->uncertainty()});
    } else {
      ++skipped;
    }
  }

  EvaluationReport report;
  std::vector<std::pair<std::string, PRCurve>> curves;
  auto add = [&](const std::string& name,
                 const std::vector<TrustedPrediction>& preds) {
    if (preds.empty()) return;
    report.sources.push_back(evaluate_source(name, preds, cutoff));
    if (!curve_path.empty()) curves.emplace_back(name, pr_curve(preds));
  };
  for (const auto& name : order) add(name, by_source[name]);
  add("fused", fused);

  Json j = io::to_json(report);
  j["threshold_mode"] = cutoff ? "fixed" : "auto";
  j["fusion_failures"] = skipped;
  if (output.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_json(output, j);
  }
  if (!curve_path.empty()) {
    auto cf = open_output(curve_path);
    io::write_curve_tsv(cf, curves);
  }
  return kExitOk;
}

int cmd_train(const io::ExperimentConfig& config, const fs::path& dir) {
  const auto data = generate_synthetic(config.synthetic);
  const auto split = split_dataset(data, config.train.seed);
  const auto result = train(split.train, config.train);
  {
    auto h = open_output(dir / "history.tsv");
    io::write_history_tsv(h, result.history);
  }
  write_json(dir / "model.json", Json{{"video", head_json(result.model.video)},
                                      {"audio", head_json(result.model.audio)}});
  return kExitOk;
}

int cmd_ablation(const io::ExperimentConfig& config, const fs::path& dir) {
  const auto data = generate_synthetic(config.synthetic);
  const auto result = run_ablation(data, config.train);
  {
    auto h = open_output(dir / "history.tsv");
    io::write_history_tsv(h, result.history);
  }
  Json j = io::to_json(result.report);
  j["config"] = io::to_json(config);
  write_json(dir / "report.json", j);
  return kExitOk;
}

int cmd_losses(const io::ExperimentConfig& config, const fs::path& dir) {
  const auto data = generate_synthetic(config.synthetic);
  const auto runs = run_loss_comparison(data, config.train);
  auto tsv = open_output(dir / "losses.tsv");
  tsv << "variant\tepoch\toverall_loss\taccuracy\tmean_fused_uncertainty\n";
  Json summary = Json::array();
  for (const auto& run : runs) {
    const std::string name(to_string(run.kind));
    for (const auto& r : run.history.epochs) {
      tsv << name << '\t' << r.epoch << '\t' << io::format_number(r.overall_loss)
          << '\t' << io::format_number(r.accuracy) << '\t'
          << io::format_number(r.mean_fused_uncertainty) << '\n';
    }
    Json s{{"variant", name}, {"diverged", run.diverged}};
    if (!run.history.epochs.empty()) {
      s["initial_loss"] = run.history.epochs.front().overall_loss;
      s["final_loss"] = run.history.epochs.back().overall_loss;
      s["initial_accuracy"] = run.history.epochs.front().accuracy;
      s["final_accuracy"] = run.history.epochs.back().accuracy;
    }
    s["eval_accuracy"] = run.eval_accuracy;
    if (run.diverged) s["diagnostic"] = run.diagnostic;
    summary.push_back(std::move(s));
  }
  write_json(dir / "summary.json", Json{{"variants", std::move(summary)}});
  return kExitOk;
}

int cmd_noise(const io::ExperimentConfig& config, const fs::path& dir) {
  if (config.noise_levels.empty()) {
    throw Error(ErrorKind::kConfigError, "missing field noise_levels");
  }
  const auto results =
      run_noise_sweep(config.synthetic, config.train, config.noise_levels);
  auto tsv = open_output(dir / "noise.tsv");
  tsv << "sigma\tmean_audio_uncertainty\tmean_fused_uncertainty\t"
         "video_accuracy\taudio_accuracy\tfused_accuracy\n";
  for (const auto& r : results) {
    tsv << io::format_number(r.sigma) << '\t'
        << io::format_number(r.mean_audio_uncertainty) << '\t'
        << io::format_number(r.mean_fused_uncertainty) << '\t'
        << io::format_number(r.video_accuracy) << '\t'
        << io::format_number(r.audio_accuracy) << '\t'
        << io::format_number(r.fused_accuracy) << '\n';
  }
  return kExitOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kTotalConflict:
    case ErrorKind::kTrainingDiverged:
      return kExitNumerical;
    default:
      return kExitData;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Trusted multimodal fusion and evaluation"};
  app.require_subcommand(1);

  std::string input, output, config_path, curve, threshold = "auto";
  std::optional<std::uint64_t> seed;

  auto* fuse = app.add_subcommand("fuse", "Fuse per-modality logits");
  fuse->add_option("--input", input, "Record file")->required();
  fuse->add_option("--output", output, "Fused opinion file")->required();

  auto* eval = app.add_subcommand("eval", "Trusted evaluation report");
  eval->add_option("--input", input, "Labelled record file")->required();
  eval->add_option("--output", output, "Report path (stdout if omitted)");
  eval->add_option("--threshold", threshold,
                   "Uncertainty cutoff in [0, 1] or \"auto\"");
  eval->add_option("--curve", curve, "Write trusted P-R curves here");

  std::vector<CLI::App*> experiments;
  for (const char* name : {"train", "ablation", "losses", "noise"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Experiment config")->required();
    sub->add_option("--output", output, "Output directory")->required();
    sub->add_option("--seed", seed, "Override both config seeds");
    experiments.push_back(sub);
  }
  experiments[0]->description("Train the two-modality toy model");
  experiments[1]->description("Video-only vs audio-only vs fused report");
  experiments[2]->description("Compare the training losses");
  experiments[3]->description("Audio noise robustness sweep");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fuse->parsed()) return cmd_fuse(input, output, err);
    if (eval->parsed()) return cmd_eval(input, output, threshold, curve, out);
    const auto config = load_config(config_path, seed);
    if (experiments[0]->parsed()) return cmd_train(config, output);
    if (experiments[1]->parsed()) return cmd_ablation(config, output);
    if (experiments[2]->parsed()) return cmd_losses(config, output);
    if (experiments[3]->parsed()) return cmd_noise(config, output);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace trustfuse::cli
