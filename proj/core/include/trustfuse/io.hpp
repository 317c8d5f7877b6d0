#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustfuse/evidence.hpp"
#include "trustfuse/metrics.hpp"
#include "trustfuse/report.hpp"
#include "trustfuse/trainer.hpp"

namespace trustfuse::io {

using Json = nlohmann::ordered_json;

// One line of the record format:
//   {"id": "...", "label": 2, "modalities": {"video": [..], "audio": [..]}}
// label may be absent or null. Modalities keep their order from the line.
struct PredictionRecord {
  std::string id;
  std::optional<std::size_t> label;
  std::vector<std::pair<std::string, std::vector<double>>> modalities;

  std::size_t num_classes() const { return modalities.front().second.size(); }
};

/// Parses line-delimited records. Blank lines are skipped. Errors name the
/// 1-based line number.
std::vector<PredictionRecord> parse_records(std::istream& in);
std::vector<PredictionRecord> read_records(const std::filesystem::path& path);

struct FusedRecord {
  std::string id;
  std::optional<std::size_t> label;
  std::vector<std::pair<std::string, Opinion>> modalities;
  std::optional<Opinion> fused;
  std::optional<std::string> error;  // set when fusion failed
};

/// Per-modality opinions and their left-fold fusion. A TotalConflict is
/// captured in `error` instead of being thrown.
FusedRecord fuse_record(const PredictionRecord& record);

Json to_json(const Opinion& opinion);
Json to_json(const FusedRecord& record);
Json to_json(const SourceReport& report);
Json to_json(const EvaluationReport& report);
Json to_json(const NoiseLevelResult& result);

std::vector<FusedRecord> parse_fused(std::istream& in);
std::vector<FusedRecord> read_fused(const std::filesystem::path& path);

struct ExperimentConfig {
  SyntheticConfig synthetic;
  TrainConfig train;
  std::vector<double> noise_levels;
};

/// Every field of "synthetic" and "train" is required; "noise_levels" is
/// optional. Violations raise ConfigError naming the field path.
ExperimentConfig parse_config(const Json& json);
ExperimentConfig load_config(const std::filesystem::path& path);
Json to_json(const ExperimentConfig& config);

/// Doubles in tab-separated output: 17 significant digits.
std::string format_number(double value);

void write_history_tsv(std::ostream& out, const TrainHistory& history);
void write_curve_tsv(std::ostream& out,
                     const std::vector<std::pair<std::string, PRCurve>>& curves);

}  // namespace trustfuse::io
