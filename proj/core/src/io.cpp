#include "trustfuse/io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "trustfuse/error.hpp"
#include "trustfuse/fusion.hpp"

namespace trustfuse::io {
namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::kParseError,
              "line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void schema_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::kSchemaError,
              "line " + std::to_string(line) + ": " + what);
}

bool is_blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

std::optional<std::size_t> parse_label(const Json& j, std::size_t line) {
  if (!j.contains("label") || j["label"].is_null()) return std::nullopt;
  const Json& l = j["label"];
  if (!l.is_number_integer() || l.get<long long>() < 0) {
    parse_fail(line, "label must be a nonnegative integer or null");
  }
  return l.get<std::size_t>();
}

std::vector<double> parse_numbers(const Json& j, std::size_t line,
                                  const std::string& field) {
  if (!j.is_array()) parse_fail(line, field + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) parse_fail(line, field + " must contain only numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Json parse_object_line(const std::string& text, std::size_t line) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    parse_fail(line, e.what());
  }
  if (!j.is_object()) parse_fail(line, "record must be a JSON object");
  return j;
}

std::string parse_id(const Json& j, std::size_t line) {
  if (!j.contains("id") || !j["id"].is_string()) {
    parse_fail(line, "missing string field \"id\"");
  }
  return j["id"].get<std::string>();
}

Opinion opinion_from_json(const Json& j, std::size_t line,
                          const std::string& field) {
  if (!j.is_object() || !j.contains("beliefs") || !j.contains("uncertainty") ||
      !j["uncertainty"].is_number()) {
    parse_fail(line, field + " must hold beliefs and uncertainty");
  }
  try {
    return Opinion::from_parts(parse_numbers(j["beliefs"], line, field),
                               j["uncertainty"].get<double>());
  } catch (const Error& e) {
    schema_fail(line, field + ": " + e.what());
  }
}

template <typename T>
T require_field(const Json& obj, const std::string& section,
                const std::string& key) {
  const std::string path = section + "." + key;
  if (!obj.contains(key)) {
    throw Error(ErrorKind::kConfigError, "missing field " + path);
  }
  const Json& v = obj[key];
  if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) {
      throw Error(ErrorKind::kConfigError, path + " must be a number");
    }
  } else {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw Error(ErrorKind::kConfigError,
                  path + " must be a nonnegative integer");
    }
  }
  return v.get<T>();
}

const Json& require_section(const Json& root, const std::string& key) {
  if (!root.contains(key)) {
    throw Error(ErrorKind::kConfigError, "missing field " + key);
  }
  if (!root[key].is_object()) {
    throw Error(ErrorKind::kConfigError, key + " must be an object");
  }
  return root[key];
}

Json ratio_json(const MaybeRatio& r) { return r ? Json(*r) : Json(nullptr); }

}  // namespace

std::vector<PredictionRecord> parse_records(std::istream& in) {
  std::vector<PredictionRecord> out;
  std::optional<std::size_t> classes;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (is_blank(text)) continue;
    const Json j = parse_object_line(text, line);
    PredictionRecord rec;
    rec.id = parse_id(j, line);
    rec.label = parse_label(j, line);
    if (!j.contains("modalities") || !j["modalities"].is_object() ||
        j["modalities"].empty()) {
      parse_fail(line, "\"modalities\" must be a nonempty object");
    }
    for (const auto& [name, values] : j["modalities"].items()) {
      rec.modalities.emplace_back(
          name, parse_numbers(values, line, "modality \"" + name + "\""));
    }
    const std::size_t c = rec.num_classes();
    for (const auto& [name, values] : rec.modalities) {
      if (values.size() != c) {
        schema_fail(line, "modality \"" + name + "\" has " +
                              std::to_string(values.size()) +
                              " logits, expected " + std::to_string(c));
      }
      for (double v : values) {
        if (!std::isfinite(v)) schema_fail(line, "non-finite logit");
      }
    }
    if (c < 2) schema_fail(line, "records need at least two classes");
    if (classes && *classes != c) {
      schema_fail(line, "record has " + std::to_string(c) +
                            " classes, earlier records have " +
                            std::to_string(*classes));
    }
    classes = c;
    if (rec.label && *rec.label >= c) {
      schema_fail(line, "label " + std::to_string(*rec.label) +
                            " outside [0, " + std::to_string(c) + ")");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<PredictionRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::kInvalidInput, "cannot open " + path.string());
  }
  return parse_records(in);
}

FusedRecord fuse_record(const PredictionRecord& record) {
  FusedRecord out;
  out.id = record.id;
  out.label = record.label;
  std::vector<Opinion> opinions;
  for (const auto& [name, values] : record.modalities) {
    opinions.push_back(opinion_from_logits(Logits(values)));
    out.modalities.emplace_back(name, opinions.back());
  }
  try {
    out.fused = combine_many(opinions);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kTotalConflict) throw;
    out.error = e.what();
  }
  return out;
}

Json to_json(const Opinion& opinion) {
  Json j;
  j["beliefs"] = std::vector<double>(opinion.beliefs().begin(),
                                     opinion.beliefs().end());
  j["uncertainty"] = opinion.uncertainty();
  j["predicted_class"] = predicted_class(opinion);
  return j;
}

Json to_json(const FusedRecord& record) {
  Json j;
  j["id"] = record.id;
  j["label"] = record.label ? Json(*record.label) : Json(nullptr);
  Json mods = Json::object();
  for (const auto& [name, o] : record.modalities) mods[name] = to_json(o);
  j["modalities"] = std::move(mods);
  j["fused"] = record.fused ? to_json(*record.fused) : Json(nullptr);
  if (record.error) j["error"] = *record.error;
  return j;
}

std::vector<FusedRecord> parse_fused(std::istream& in) {
  std::vector<FusedRecord> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (is_blank(text)) continue;
    const Json j = parse_object_line(text, line);
    FusedRecord rec;
    rec.id = parse_id(j, line);
    rec.label = parse_label(j, line);
    if (!j.contains("modalities") || !j["modalities"].is_object()) {
      parse_fail(line, "\"modalities\" must be an object");
    }
    for (const auto& [name, o] : j["modalities"].items()) {
      rec.modalities.emplace_back(name, opinion_from_json(o, line, name));
    }
    if (j.contains("fused") && !j["fused"].is_null()) {
      rec.fused = opinion_from_json(j["fused"], line, "fused");
    }
    if (j.contains("error")) {
      if (!j["error"].is_string()) parse_fail(line, "error must be a string");
      rec.error = j["error"].get<std::string>();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<FusedRecord> read_fused(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::kInvalidInput, "cannot open " + path.string());
  }
  return parse_fused(in);
}

Json to_json(const SourceReport& r) {
  Json j;
  j["source"] = r.name;
  j["n"] = r.cells.n;
  j["accuracy"] = r.plain.accuracy;
  j["macro_f1"] = r.plain.macro_f1;
  j["weighted_f1"] = r.plain.weighted_f1;
  j["trusted_accuracy"] = ratio_json(r.trusted_accuracy);
  j["trusted_f1"] = ratio_json(r.trusted_f1);
  j["trusted_precision"] = ratio_json(r.trusted_precision);
  j["trusted_recall"] = ratio_json(r.trusted_recall);
  j["threshold"] = r.threshold;
  j["confusion"] = Json{{"HT", r.cells.ht},
                        {"LT", r.cells.lt},
                        {"HF", r.cells.hf},
                        {"LF", r.cells.lf}};
  return j;
}

Json to_json(const EvaluationReport& report) {
  Json sources = Json::array();
  for (const auto& s : report.sources) sources.push_back(to_json(s));
  return Json{{"sources", std::move(sources)}};
}

Json to_json(const NoiseLevelResult& r) {
  return Json{{"sigma", r.sigma},
              {"mean_audio_uncertainty", r.mean_audio_uncertainty},
              {"mean_fused_uncertainty", r.mean_fused_uncertainty},
              {"video_accuracy", r.video_accuracy},
              {"audio_accuracy", r.audio_accuracy},
              {"fused_accuracy", r.fused_accuracy}};
}

ExperimentConfig parse_config(const Json& root) {
  if (!root.is_object()) {
    throw Error(ErrorKind::kConfigError, "config must be a JSON object");
  }
  ExperimentConfig c;
  const Json& syn = require_section(root, "synthetic");
  c.synthetic.classes = require_field<std::size_t>(syn, "synthetic", "classes");
  c.synthetic.feature_dim =
      require_field<std::size_t>(syn, "synthetic", "feature_dim");
  c.synthetic.samples_per_class =
      require_field<std::size_t>(syn, "synthetic", "samples_per_class");
  c.synthetic.video_noise = require_field<double>(syn, "synthetic", "video_noise");
  c.synthetic.audio_noise = require_field<double>(syn, "synthetic", "audio_noise");
  c.synthetic.class_separation =
      require_field<double>(syn, "synthetic", "class_separation");
  c.synthetic.seed = require_field<std::uint64_t>(syn, "synthetic", "seed");

  const Json& tr = require_section(root, "train");
  c.train.learning_rate = require_field<double>(tr, "train", "learning_rate");
  c.train.epochs = require_field<std::size_t>(tr, "train", "epochs");
  c.train.target_uncertainty =
      require_field<double>(tr, "train", "target_uncertainty");
  c.train.seed = require_field<std::uint64_t>(tr, "train", "seed");

  if (root.contains("noise_levels")) {
    const Json& levels = root["noise_levels"];
    if (!levels.is_array()) {
      throw Error(ErrorKind::kConfigError, "noise_levels must be an array");
    }
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (!levels[i].is_number()) {
        throw Error(ErrorKind::kConfigError,
                    "noise_levels[" + std::to_string(i) + "] must be a number");
      }
      c.noise_levels.push_back(levels[i].get<double>());
    }
  }
  c.synthetic.validate();
  c.train.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::kConfigError, "cannot open " + path.string());
  }
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::kConfigError, e.what());
  }
  return parse_config(j);
}

Json to_json(const ExperimentConfig& c) {
  return Json{
      {"synthetic",
       {{"classes", c.synthetic.classes},
        {"feature_dim", c.synthetic.feature_dim},
        {"samples_per_class", c.synthetic.samples_per_class},
        {"video_noise", c.synthetic.video_noise},
        {"audio_noise", c.synthetic.audio_noise},
        {"class_separation", c.synthetic.class_separation},
        {"seed", c.synthetic.seed}}},
      {"train",
       {{"learning_rate", c.train.learning_rate},
        {"epochs", c.train.epochs},
        {"target_uncertainty", c.train.target_uncertainty},
        {"seed", c.train.seed}}},
      {"noise_levels", c.noise_levels}};
}

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

void write_history_tsv(std::ostream& out, const TrainHistory& history) {
  out << "epoch\toverall_loss\tvideo_loss\taudio_loss\tfused_loss\taccuracy\t"
         "mean_fused_uncertainty\n";
  for (const auto& r : history.epochs) {
    out << r.epoch << '\t' << format_number(r.overall_loss) << '\t'
        << format_number(r.video_loss) << '\t' << format_number(r.audio_loss)
        << '\t' << format_number(r.fused_loss) << '\t'
        << format_number(r.accuracy) << '\t'
        << format_number(r.mean_fused_uncertainty) << '\n';
  }
}

void write_curve_tsv(
    std::ostream& out,
    const std::vector<std::pair<std::string, PRCurve>>& curves) {
  out << "source\tthreshold\ttrusted_recall\ttrusted_precision\t"
         "precision_defined\n";
  for (const auto& [name, curve] : curves) {
    for (const auto& p : curve.points) {
      out << name << '\t' << format_number(p.threshold) << '\t'
          << format_number(p.trusted_recall) << '\t'
          << format_number(p.trusted_precision) << '\t'
          << (p.precision_defined ? 1 : 0) << '\n';
    }
  }
}

}  // namespace trustfuse::io
