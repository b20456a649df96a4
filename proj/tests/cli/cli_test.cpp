#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "arggen/evaluator.hpp"
#include "test_support.hpp"

namespace {

using arggen::testing::TempDir;

struct Result {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Result run(const TempDir& dir, const std::vector<std::string>& args, const std::string& stdin_text = "") {
  std::string cmd = quote(ARGGEN_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  const auto in = dir / "stdin.txt";
  std::ofstream(in) << stdin_text;
  cmd += " <" + quote(in.string()) + " >" + quote((dir / "stdout.txt").string()) + " 2>" +
         quote((dir / "stderr.txt").string());
  const int status = std::system(cmd.c_str());
  Result r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(dir / "stdout.txt");
  r.err = slurp(dir / "stderr.txt");
  return r;
}

std::string error_code(const Result& r) {
  const auto line = r.err.substr(r.err.rfind('{'));
  return nlohmann::json::parse(line).at("error").get<std::string>();
}

std::vector<std::string> with_work(const TempDir& dir, std::vector<std::string> args) {
  args.push_back("--work-dir");
  args.push_back((dir / "work").string());
  args.push_back("--log-level");
  args.push_back("warn");
  return args;
}

void ingest_and_label(const TempDir& dir) {
  const std::string data = ARGGEN_DATA_DIR;
  ASSERT_EQ(run(dir, with_work(dir, {"ingest", "--gold", data + "/gold.jsonl", "--auto", data + "/auto"})).exit_code, 0);
  ASSERT_EQ(run(dir, with_work(dir, {"label"})).exit_code, 0);
}

TEST(Cli, EchoChainScoresPerfectly) {
  TempDir dir;
  const std::string data = ARGGEN_DATA_DIR;
  auto ingest = run(dir, with_work(dir, {"ingest", "--gold", data + "/gold.jsonl", "--auto", data + "/auto"}));
  ASSERT_EQ(ingest.exit_code, 0) << ingest.err;
  EXPECT_NE(ingest.out.find("Train Data"), std::string::npos);
  ASSERT_EQ(run(dir, with_work(dir, {"label"})).exit_code, 0);
  auto pairs = run(dir, with_work(dir, {"build-pairs", "--k", "3"}));
  ASSERT_EQ(pairs.exit_code, 0) << pairs.err;
  EXPECT_NE(pairs.out.find("test: 20 pairs"), std::string::npos) << pairs.out;
  for (const char* stage : {"train", "generate", "evaluate"}) {
    auto r = run(dir, with_work(dir, {stage, "--k", "3", "--model", "echo"}));
    ASSERT_EQ(r.exit_code, 0) << stage << ": " << r.err;
    if (std::string(stage) == "evaluate") {
      EXPECT_NE(r.out.find("100.00%"), std::string::npos) << r.out;
      EXPECT_NE(r.out.find("1.000"), std::string::npos) << r.out;
    }
  }
  const auto run_dir = dir / "work/runs/echo_seq2seq_k3_original_s0";
  EXPECT_TRUE(std::filesystem::exists(run_dir / "manifest.json"));
  EXPECT_TRUE(std::filesystem::exists(run_dir / "generations.jsonl"));
  auto row = arggen::evaluator::read_metric_row(run_dir / "metrics.json");
  EXPECT_EQ(row.pair_count, 20u);
  EXPECT_DOUBLE_EQ(row.avg_word_overlap, 100.0);
}

TEST(Cli, EvaluateBeforeGenerateNamesTheMissingStage) {
  TempDir dir;
  auto r = run(dir, with_work(dir, {"evaluate", "--model", "echo"}));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(error_code(r), "StageDependencyError");
  EXPECT_NE(r.err.find("arggen"), std::string::npos);
}

TEST(Cli, ReportCombinesRuns) {
  TempDir dir;
  using arggen::evaluator::MetricRow;
  arggen::evaluator::write_metric_row(dir / "a/metrics.json",
                                      MetricRow{"GPT-2", 3, arggen::pairs::Source::Original, "Original", 15.12, 0.335, 20});
  arggen::evaluator::write_metric_row(
      dir / "b/metrics.json", MetricRow{"FLAN-T5", 5, arggen::pairs::Source::Rewritten, "GPT 3.5", 63.13, 0.492, 20});
  auto r = run(dir, {"report", (dir / "a").string(), (dir / "b").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("GPT-2"), std::string::npos);
  EXPECT_NE(r.out.find("**63.13%**"), std::string::npos);
  EXPECT_NE(r.out.find("15.12%"), std::string::npos);

  auto csv = run(dir, {"report", (dir / "a").string(), (dir / "b").string(), "--format", "csv", "--latex",
                       (dir / "t.tex").string()});
  ASSERT_EQ(csv.exit_code, 0) << csv.err;
  EXPECT_EQ(csv.out.rfind("model_id,k,source,pair_count", 0), 0u);
  EXPECT_NE(slurp(dir / "t.tex").find("\\textbf{63.13\\%}"), std::string::npos);

  auto missing = run(dir, {"report", (dir / "nope").string()});
  EXPECT_EQ(missing.exit_code, 1);
  EXPECT_EQ(error_code(missing), "StageDependencyError");
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  TempDir dir;
  ingest_and_label(dir);
  std::ofstream(dir / "config.json") << R"({"k": 4, "embedding_dim": 64})";
  auto r = run(dir, with_work(dir, {"build-pairs", "--config", (dir / "config.json").string()}));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "work/pairs_k4/train.jsonl"));
  r = run(dir, with_work(dir, {"build-pairs", "--config", (dir / "config.json").string(), "--k", "2"}));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "work/pairs_k2/train.jsonl"));

  std::ofstream(dir / "bad.json") << R"({"kk": 4})";
  r = run(dir, with_work(dir, {"build-pairs", "--config", (dir / "bad.json").string()}));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(error_code(r), "ConfigError");
  r = run(dir, with_work(dir, {"build-pairs", "--k", "three"}));
  EXPECT_EQ(error_code(r), "ConfigError");
}

TEST(Cli, UsageErrors) {
  TempDir dir;
  auto r = run(dir, {"frobnicate"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(error_code(r), "UsageError");
  r = run(dir, {"review", "--approve-all", "--reject-all"});
  EXPECT_EQ(r.exit_code, 2);
}

TEST(Cli, WorkDirLockBlocksSecondWriter) {
  TempDir dir;
  std::filesystem::create_directories(dir / "work");
  std::ofstream(dir / "work/.arggen.lock") << "12345\n";
  auto r = run(dir, with_work(dir, {"label"}));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(error_code(r), "LockHeld");
  EXPECT_NE(r.err.find("12345"), std::string::npos);
  std::filesystem::remove(dir / "work/.arggen.lock");
  r = run(dir, with_work(dir, {"label"}));
  EXPECT_EQ(error_code(r), "StageDependencyError");
  EXPECT_FALSE(std::filesystem::exists(dir / "work/.arggen.lock"));
}

TEST(Cli, RewriteReviewProducesRewrittenPairs) {
  TempDir dir;
  ingest_and_label(dir);
  ASSERT_EQ(run(dir, with_work(dir, {"build-pairs", "--k", "3"})).exit_code, 0);
  auto r = run(dir, with_work(dir, {"rewrite", "--k", "3", "--rewrite-backend", "upper"}));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  // Interactive review: approve the first record, reject the second, then quit.
  r = run(dir, with_work(dir, {"review", "--k", "3"}), "a looks fine\nr\nq\n");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("approved 1"), std::string::npos) << r.out;
  r = run(dir, with_work(dir, {"review", "--k", "3", "--approve-all"}));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto test_pairs = arggen::pairs::read_pairs(dir / "work/pairs_k3/rewritten/test.jsonl");
  ASSERT_EQ(test_pairs.size(), 20u);
  std::size_t rewritten = 0;
  for (const auto& p : test_pairs) rewritten += p.source == arggen::pairs::Source::Rewritten;
  EXPECT_GE(rewritten, 19u);
}

TEST(Cli, StagesAreIdempotent) {
  TempDir a, b;
  for (const TempDir* dir : {&a, &b}) {
    ingest_and_label(*dir);
    ASSERT_EQ(run(*dir, with_work(*dir, {"build-pairs", "--k", "3"})).exit_code, 0);
    ASSERT_EQ(run(*dir, with_work(*dir, {"train", "--k", "3", "--model", "tiny", "--epochs", "2"})).exit_code, 0);
    ASSERT_EQ(run(*dir, with_work(*dir, {"generate", "--k", "3", "--model", "tiny", "--max-new-tokens", "20"})).exit_code, 0);
  }
  const std::string run_dir = "work/runs/tiny_seq2seq_k3_original_s0/";
  for (const std::string& f : std::vector<std::string>{"work/corpus.jsonl", "work/labeled.jsonl", "work/pairs_k3/train.jsonl",
                              "work/pairs_k3/test.jsonl", run_dir + "generations.jsonl",
                              run_dir + "checkpoint/params.bin"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_FALSE(slurp(a / f).empty()) << f;
  }
}

}  // namespace
