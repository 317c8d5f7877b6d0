#include <gtest/gtest.h>

#include "cli_fixtures.hpp"
#include "trustfuse/io.hpp"

namespace trustfuse {
namespace {

using testing::run_cli;
using testing::slurp;

TEST(CliFuse, SingleModalityAndWorkedExample) {
  const auto dir = testing::scratch_dir("fuse");
  const double a0 = testing::softplus_inverse(6.0);
  const double a1 = testing::softplus_inverse(2.0);
  const double b = testing::softplus_inverse(4.0);
  testing::write_lines(
      dir / "in.jsonl",
      {testing::record_json("one", 0, {{"video", {0.3, -0.2}}}),
       testing::record_json("pair", std::nullopt,
                            {{"video", {a0, a1}}, {"audio", {b, b}}})});
  const auto r = run_cli({"fuse", "--input", (dir / "in.jsonl").string(),
                          "--output", (dir / "out.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto fused = io::read_fused(dir / "out.jsonl");
  ASSERT_EQ(fused.size(), 2u);
  EXPECT_EQ(fused[0].id, "one");
  EXPECT_EQ(fused[1].id, "pair");
  EXPECT_NEAR(fused[0].fused->belief(0),
              fused[0].modalities[0].second.belief(0), 1e-15);
  EXPECT_NEAR(fused[1].fused->belief(0), 0.647059, 1e-6);
  EXPECT_NEAR(fused[1].fused->belief(1), 0.294118, 1e-6);
  EXPECT_NEAR(fused[1].fused->uncertainty(), 0.058824, 1e-6);
}

TEST(CliFuse, TotalConflictIsRecordedPerRecord) {
  const auto dir = testing::scratch_dir("conflict");
  testing::write_lines(
      dir / "in.jsonl",
      {testing::record_json("bad", 0,
                            {{"video", {1e30, -1e30}}, {"audio", {-1e30, 1e30}}}),
       testing::record_json("good", 0, {{"video", {1, 0}}, {"audio", {2, 0}}})});
  const auto r = run_cli({"fuse", "--input", (dir / "in.jsonl").string(),
                          "--output", (dir / "out.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto fused = io::read_fused(dir / "out.jsonl");
  ASSERT_EQ(fused.size(), 2u);
  EXPECT_FALSE(fused[0].fused.has_value());
  ASSERT_TRUE(fused[0].error.has_value());
  EXPECT_NE(fused[0].error->find("TotalConflict"), std::string::npos);
  EXPECT_TRUE(fused[1].fused.has_value());
}

TEST(CliFuse, DataErrorsExitWithTwo) {
  const auto dir = testing::scratch_dir("fuse_bad");
  {
    std::ofstream out(dir / "in.jsonl");
    out << R"({"id": "a", "modalities": {"v": [0, 1], "w": [0]}})" << '\n';
  }
  const auto r = run_cli({"fuse", "--input", (dir / "in.jsonl").string(),
                          "--output", (dir / "out.jsonl").string()});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("line 1"), std::string::npos);
}

TEST(CliEval, SevenPredictionsAtFixedCutoff) {
  const auto dir = testing::scratch_dir("eval7");
  testing::write_lines(dir / "in.jsonl", testing::seven_records());
  const auto r = run_cli({"eval", "--input", (dir / "in.jsonl").string(),
                          "--threshold", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = io::Json::parse(r.out);
  const auto& video = j["sources"][0];
  EXPECT_EQ(video["source"], "video");
  EXPECT_DOUBLE_EQ(video["trusted_precision"].get<double>(), 0.75);
  EXPECT_DOUBLE_EQ(video["trusted_recall"].get<double>(), 0.6);
  EXPECT_NEAR(video["trusted_f1"].get<double>(), 0.666667, 1e-6);
  EXPECT_EQ(video["confusion"]["HT"], 3);
  EXPECT_EQ(video["confusion"]["LF"], 1);
}

TEST(CliEval, AutoEqualsExplicitSelectedValue) {
  const auto dir = testing::scratch_dir("eval_auto");
  testing::write_lines(dir / "in.jsonl", testing::seven_records());
  const auto curve = dir / "curve.tsv";
  const auto a = run_cli({"eval", "--input", (dir / "in.jsonl").string(),
                          "--threshold", "auto", "--curve", curve.string()});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto ja = io::Json::parse(a.out);
  const double chosen = ja["sources"][0]["threshold"].get<double>();
  const auto e = run_cli({"eval", "--input", (dir / "in.jsonl").string(),
                          "--threshold", io::format_number(chosen)});
  ASSERT_EQ(e.code, 0) << e.err;
  auto je = io::Json::parse(e.out);
  auto ja_sources = ja["sources"];
  EXPECT_EQ(ja_sources, je["sources"]);

  const std::string tsv = slurp(curve);
  EXPECT_EQ(tsv.rfind("source\tthreshold\ttrusted_recall\ttrusted_precision", 0),
            0u);
  EXPECT_NE(tsv.find("video\t0.5\t0.59999999999999998\t0.75\t1"),
            std::string::npos);
}

TEST(CliEval, AllCorrectConfidentReportsOnes) {
  const auto dir = testing::scratch_dir("eval_ones");
  std::vector<io::Json> lines;
  for (std::size_t i = 0; i < 6; ++i) {
    std::vector<double> z(3, -1e6);
    z[i % 3] = 1e6;
    lines.push_back(testing::record_json("r" + std::to_string(i), i % 3,
                                         {{"video", z}, {"audio", z}}));
  }
  testing::write_lines(dir / "in.jsonl", lines);
  const auto r = run_cli({"eval", "--input", (dir / "in.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = io::Json::parse(r.out);
  ASSERT_EQ(j["sources"].size(), 3u);
  for (const auto& s : j["sources"]) {
    for (const char* key : {"accuracy", "macro_f1", "weighted_f1",
                            "trusted_accuracy", "trusted_f1"}) {
      EXPECT_EQ(s[key].get<double>(), 1.0) << s["source"] << " " << key;
    }
  }
}

TEST(CliEval, MissingLabelsAndUsage) {
  const auto dir = testing::scratch_dir("eval_bad");
  testing::write_lines(dir / "in.jsonl",
                       {testing::record_json("x", std::nullopt,
                                             {{"video", {0.0, 1.0}}})});
  const auto r = run_cli({"eval", "--input", (dir / "in.jsonl").string()});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("MissingLabels"), std::string::npos);

  EXPECT_EQ(run_cli({"eval", "--input", (dir / "in.jsonl").string(),
                     "--threshold", "high"})
                .code,
            cli::kExitUsage);
  EXPECT_EQ(run_cli({"bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"fuse", "--input", "x"}).code, cli::kExitUsage);
}

TEST(CliExperiments, TrainIsDeterministicAndSeedOverrides) {
  const auto dir = testing::scratch_dir("train");
  testing::write_small_config(dir / "config.json");
  const auto cfg = (dir / "config.json").string();
  ASSERT_EQ(run_cli({"train", "--config", cfg, "--output", (dir / "a").string()}).code, 0);
  ASSERT_EQ(run_cli({"train", "--config", cfg, "--output", (dir / "b").string()}).code, 0);
  ASSERT_EQ(run_cli({"train", "--config", cfg, "--output", (dir / "c").string(),
                     "--seed", "7"}).code, 0);
  EXPECT_EQ(slurp(dir / "a" / "history.tsv"), slurp(dir / "b" / "history.tsv"));
  EXPECT_EQ(slurp(dir / "a" / "model.json"), slurp(dir / "b" / "model.json"));
  EXPECT_NE(slurp(dir / "a" / "history.tsv"), slurp(dir / "c" / "history.tsv"));
  const std::string history = slurp(dir / "a" / "history.tsv");
  EXPECT_EQ(std::count(history.begin(), history.end(), '\n'), 31);
}

TEST(CliExperiments, AblationLossesNoiseWriteArtifacts) {
  const auto dir = testing::scratch_dir("experiments");
  testing::write_small_config(dir / "config.json", 10);
  const auto cfg = (dir / "config.json").string();
  const auto out = dir / "out";
  ASSERT_EQ(run_cli({"ablation", "--config", cfg, "--output", out.string()}).code, 0);
  ASSERT_EQ(run_cli({"losses", "--config", cfg, "--output", out.string()}).code, 0);
  ASSERT_EQ(run_cli({"noise", "--config", cfg, "--output", out.string()}).code, 0);

  const auto report = io::Json::parse(slurp(out / "report.json"));
  ASSERT_EQ(report["sources"].size(), 3u);
  for (const auto& s : report["sources"]) {
    const auto& c = s["confusion"];
    EXPECT_EQ(c["HT"].get<int>() + c["LT"].get<int>() + c["HF"].get<int>() +
                  c["LF"].get<int>(),
              s["n"].get<int>());
  }
  const auto summary = io::Json::parse(slurp(out / "summary.json"));
  EXPECT_EQ(summary["variants"].size(), 6u);
  const std::string noise = slurp(out / "noise.tsv");
  EXPECT_EQ(std::count(noise.begin(), noise.end(), '\n'), 4);
}

TEST(CliExperiments, ConfigErrorsNameTheField) {
  const auto dir = testing::scratch_dir("config_bad");
  io::ExperimentConfig c;
  auto j = io::to_json(c);
  j["synthetic"].erase("class_separation");
  {
    std::ofstream out(dir / "config.json");
    out << j.dump();
  }
  const auto r = run_cli({"train", "--config", (dir / "config.json").string(),
                          "--output", (dir / "out").string()});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("synthetic.class_separation"), std::string::npos);

  // noise needs its levels.
  j = io::to_json(c);
  j.erase("noise_levels");
  {
    std::ofstream out(dir / "config.json");
    out << j.dump();
  }
  const auto n = run_cli({"noise", "--config", (dir / "config.json").string(),
                          "--output", (dir / "out").string()});
  EXPECT_EQ(n.code, cli::kExitData);
  EXPECT_NE(n.err.find("noise_levels"), std::string::npos);
}

TEST(CliExperiments, DivergenceExitsWithThree) {
  const auto dir = testing::scratch_dir("diverge");
  io::ExperimentConfig c;
  c.synthetic.samples_per_class = 10;
  c.train.learning_rate = 1e308;
  c.train.epochs = 5;
  {
    std::ofstream out(dir / "config.json");
    out << io::to_json(c).dump();
  }
  const auto r = run_cli({"train", "--config", (dir / "config.json").string(),
                          "--output", (dir / "out").string()});
  EXPECT_EQ(r.code, cli::kExitNumerical) << r.err;
}

}  // namespace
}  // namespace trustfuse
