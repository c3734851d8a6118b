#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dstrc/cli.hpp"
#include "test_support.hpp"

namespace dstrc {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> fixture_args(std::vector<std::string> head) {
  const auto dir = test::fixture50_dir();
  head.insert(head.end(), {"--dialogues", (dir / "dialogues.json").string(), "--ontology",
                           (dir / "ontology.json").string(), "--aliases", (dir / "aliases.json").string()});
  return head;
}

std::vector<std::string> operator+(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dstrc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path path(const std::string& name) const { return dir_ / name; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

TEST_F(CliTest, ConvertEmptyFileGivesEmptyArray) {
  const auto raw = write("raw.json", "");
  const auto r = run_cli({"convert", "--raw", raw.string(), "--out", path("out.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("out.json")), "[]\n");
}

TEST_F(CliTest, ConvertTruncatedJsonReportsByteOffset) {
  const auto raw = write("raw.json", "{\"PMUL0001.json\": {\"log\": [");
  const auto r = run_cli({"convert", "--raw", raw.string(), "--out", path("out.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("byte"), std::string::npos) << r.err;
}

TEST_F(CliTest, ConvertMiniCorpusLoads) {
  const auto r = run_cli({"convert", "--raw", (test::data_dir() / "fixtures" / "multiwoz_raw_mini.json").string(),
                          "--out", path("d.json").string(), "--raw-ontology",
                          (test::data_dir() / "fixtures" / "multiwoz_ontology_mini.json").string(), "--ontology-out",
                          path("o.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto corpus = load_corpus(path("d.json"), path("o.json"));
  EXPECT_EQ(corpus.dialogues.size(), 2u);
}

TEST_F(CliTest, AnalyzeIsStable) {
  const auto a = run_cli(fixture_args({"analyze"}));
  ASSERT_EQ(a.code, 0) << a.err;
  std::istringstream lines(a.out);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header.rfind("slot,", 0), 0u) << header;
  std::size_t rows = 0;
  for (std::string line; std::getline(lines, line);) rows += !line.empty();
  EXPECT_EQ(rows, 30u);
  const auto b = run_cli(fixture_args({"analyze", "--jobs", "3"}));
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, OracleNeedsExplicitOptIn) {
  const auto refused = run_cli(fixture_args({"evaluate", "--reader", "oracle"}));
  EXPECT_EQ(refused.code, 1);
  EXPECT_NE(refused.err.find("--allow-oracle"), std::string::npos);

  const auto r = run_cli(fixture_args({"evaluate", "--reader", "oracle", "--allow-oracle"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["joint_goal_accuracy"].get<double>(), 1.0);
  EXPECT_TRUE(doc.contains("watermark"));
  EXPECT_EQ(doc["config"]["reader"], "oracle");
}

TEST_F(CliTest, ExactMatchReportHasNoWatermark) {
  const auto r = run_cli(fixture_args({"evaluate", "--reader", "exact-match"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(json::parse(r.out).contains("watermark"));
}

TEST_F(CliTest, AblatingCategoricalRoutesAllSlotsToSpans) {
  const auto r = run_cli(fixture_args({"evaluate", "--reader", "exact-match", "--ablate", "no-categorical-model"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  ASSERT_FALSE(doc["per_slot"].empty());
  for (const auto& [slot, e] : doc["per_slot"].items()) EXPECT_EQ(e["model"], "extractive") << slot;
  EXPECT_EQ(doc["error_breakdown"]["categorical"]["total"], 0);
}

TEST_F(CliTest, ReportsAreByteIdenticalAcrossRunsAndJobs) {
  const auto args = fixture_args({"evaluate", "--reader", "random", "--seed", "3"});
  const auto a = run_cli(args + std::vector<std::string>{"--jobs", "1"});
  const auto b = run_cli(args + std::vector<std::string>{"--jobs", "1"});
  const auto c = run_cli(args + std::vector<std::string>{"--jobs", "3"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
}

TEST_F(CliTest, TrackThenEvaluateMatchesDirectEvaluate) {
  const auto preds = path("preds.jsonl");
  const auto t = run_cli(fixture_args({"track", "--reader", "exact-match", "--out", preds.string()}));
  ASSERT_EQ(t.code, 0) << t.err;
  const auto indirect = run_cli(fixture_args({"evaluate", "--predictions", preds.string()}));
  const auto direct = run_cli(fixture_args({"evaluate", "--reader", "exact-match"}));
  ASSERT_EQ(indirect.code, 0) << indirect.err;
  ASSERT_EQ(direct.code, 0) << direct.err;
  json a = json::parse(indirect.out);
  json b = json::parse(direct.out);
  a.erase("config");
  b.erase("config");
  EXPECT_EQ(a, b);
}

TEST_F(CliTest, OraclePredictionsKeepTheWatermark) {
  const auto preds = path("preds.jsonl");
  ASSERT_EQ(run_cli(fixture_args({"track", "--reader", "oracle", "--allow-oracle", "--out", preds.string()})).code, 0);
  const auto r = run_cli(fixture_args({"evaluate", "--predictions", preds.string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out).contains("watermark"));
}

TEST_F(CliTest, CsvOutputs) {
  const auto r = run_cli(fixture_args({"evaluate", "--reader", "exact-match", "--out", path("r.json").string(),
                                       "--csv", path("s.csv").string(), "--slot-csv", path("slots.csv").string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("s.csv")).rfind("metric,value\njoint_goal_accuracy,", 0), 0u);
  EXPECT_EQ(slurp(path("slots.csv")).rfind("slot,model,accuracy", 0), 0u);
}

TEST_F(CliTest, ExternalReaderNeedsEndpoint) {
  EXPECT_EQ(run_cli(fixture_args({"track", "--reader", "external"})).code, 1);
  EXPECT_EQ(run_cli(fixture_args({"track", "--reader", "exact-match", "--endpoint", "exec:true"})).code, 1);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli({"analyze", "--no-such-flag"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli(fixture_args({"track", "--reader", "psychic"})).code, 2);
}

TEST_F(CliTest, InvalidFractionIsALibraryError) {
  const auto r = run_cli(fixture_args({"sample", "--fraction", "0"}));
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, SampleMatchesReferenceIds) {
  std::ifstream in(test::data_dir() / "oracles" / "fewshot_expected.json");
  const json doc = json::parse(in);
  for (const auto& c : doc["cases"]) {
    if (c["corpus"] != "fixture50") continue;
    std::ostringstream fraction;
    fraction << c["fraction"].get<double>();
    const auto r = run_cli(fixture_args({"sample", "--fraction", fraction.str(), "--seed", c["seed"].get<std::string>()}));
    ASSERT_EQ(r.code, 0) << r.err;
    std::string expected;
    for (const auto& id : c["ids"]) expected += id.get<std::string>() + "\n";
    EXPECT_EQ(r.out, expected) << c["fraction"] << " " << c["seed"];
  }
}

TEST_F(CliTest, GenerateWritesParseableJsonl) {
  const auto r = run_cli(fixture_args({"generate", "--mode", "both", "--out", path("ex.jsonl").string(), "--report",
                                       path("report.json").string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path("ex.jsonl"));
  std::size_t n = 0;
  for (std::string line; std::getline(in, line); ++n) {
    const json ex = json::parse(line);
    ASSERT_TRUE(ex.contains("question"));
  }
  const json report = json::parse(slurp(path("report.json")));
  EXPECT_EQ(report["report"]["total"].get<std::size_t>(), n);
}

}  // namespace
}  // namespace dstrc
