#include <gtest/gtest.h>

#include "arggen/generation.hpp"
#include "arggen/synthetic.hpp"
#include "test_support.hpp"

#include <algorithm>

namespace {

using namespace arggen;
using namespace arggen::generation;
using arggen::testing::TempDir;

// Always emits the same raw text.
class FixedAdapter final : public ModelAdapter {
 public:
  explicit FixedAdapter(std::string output, Family family = Family::Causal)
      : output_(std::move(output)), family_(family) {}
  std::string model_id() const override { return "fixed"; }
  Family family() const override { return family_; }
  std::size_t count_tokens(std::string_view text) const override { return pairs::whitespace_token_count(text); }
  std::vector<double> fine_tune(const TrainingSet& train, const TrainingSet&, const FineTuneConfig&) override {
    seen_causal = std::holds_alternative<std::vector<std::string>>(train);
    return {1.0};
  }
  std::string generate(std::string_view prompt, const GenerateOptions& options) const override {
    prompts.emplace_back(prompt);
    last_max_new_tokens = options.max_new_tokens;
    return output_;
  }
  void save(const std::filesystem::path&) const override {}
  void load(const std::filesystem::path&) override {}

  bool seen_causal = false;
  mutable std::vector<std::string> prompts;
  mutable std::size_t last_max_new_tokens = 0;

 private:
  std::string output_;
  Family family_;
};

RunManifest run_named(const std::string& id) {
  RunManifest m;
  m.run_id = id;
  return m;
}

TEST(Echo, ReturnsReferenceForTrainedPrompts) {
  auto train = synthetic::templated_pairs(5, 1);
  for (auto family : {Family::Causal, Family::Seq2Seq}) {
    EchoAdapter echo(family);
    fine_tune_run(train, {}, echo, {}, {"r", 3, pairs::Source::Original});
    auto records = generate_for_test(train, echo, run_named("r"));
    ASSERT_EQ(records.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_EQ(records[i].generated_argument, train[i].argument_summary);
      EXPECT_EQ(records[i].reference_argument, train[i].argument_summary);
      EXPECT_EQ(records[i].run_id, "r");
      EXPECT_FALSE(records[i].empty_generation);
    }
  }
}

TEST(Echo, UnknownPromptGivesFlaggedEmptyRecord) {
  EchoAdapter echo;
  auto records = generate_for_test(synthetic::templated_pairs(2, 3), echo, run_named("r"));
  ASSERT_EQ(records.size(), 2u);
  EXPECT_TRUE(records[0].empty_generation);
  EXPECT_EQ(records[0].generated_argument, "");
}

TEST(Echo, CheckpointRoundTrip) {
  TempDir dir;
  EchoAdapter echo;
  echo.add_reference("[Facts] a. [Arguments]", "b.");
  echo.save(dir.path());
  EchoAdapter loaded;
  loaded.load(dir.path());
  EXPECT_EQ(loaded.generate("[Facts] a. [Arguments]", {}), "b.");
}

TEST(Strip, RemovesPromptAndSpecialTokens) {
  EXPECT_EQ(strip_generation("[Arguments] foo", "[Facts] x. [Arguments]"), "foo");
  EXPECT_EQ(strip_generation("[Facts] x. [Arguments] the appeal fails.", "[Facts] x. [Arguments]"),
            "the appeal fails.");
  EXPECT_EQ(strip_generation("  plain   text ", "[Facts] x. [Arguments]"), "plain text");
  EXPECT_EQ(strip_generation("[Facts] [Arguments]", "p"), "");
}

TEST(Generate, CausalPromptsEndAtArgumentsMarker) {
  FixedAdapter adapter("[Arguments] foo");
  auto test = synthetic::templated_pairs(20, 4);
  GenerationSettings settings;
  auto records = generate_for_test(test, adapter, run_named("r"), settings);
  ASSERT_EQ(records.size(), 20u);
  EXPECT_EQ(adapter.last_max_new_tokens, 256u);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(records[i].generated_argument, "foo");
    EXPECT_EQ(records[i].doc_id, test[i].doc_id);
    const auto& p = adapter.prompts[i];
    EXPECT_EQ(p, "[Facts] " + test[i].facts_summary + " [Arguments]");
  }
}

TEST(Generate, ThreadedRunKeepsOrder) {
  EchoAdapter echo;
  auto test = synthetic::templated_pairs(20, 4);
  for (const auto& p : test) echo.add_reference(test_prompt(p, echo, {}), p.argument_summary);
  GenerationSettings settings;
  settings.threads = 4;
  auto records = generate_for_test(test, echo, run_named("r"), settings);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(records[i].generated_argument, test[i].argument_summary);
}

TEST(FineTune, FamilyDispatchAndErrors) {
  auto train = synthetic::templated_pairs(4, 2);
  FixedAdapter causal("x", Family::Causal);
  fine_tune_run(train, {}, causal, {}, {"r", 3, pairs::Source::Original});
  EXPECT_TRUE(causal.seen_causal);
  FixedAdapter s2s("x", Family::Seq2Seq);
  fine_tune_run(train, {}, s2s, {}, {"r", 3, pairs::Source::Original});
  EXPECT_FALSE(s2s.seen_causal);

  EXPECT_ARGGEN_ERROR(fine_tune_run({}, {}, causal, {}, {"r", 3, pairs::Source::Original}), MissingData);
  FineTuneConfig tight;
  tight.max_tokens = 40;
  EXPECT_ARGGEN_ERROR(fine_tune_run(train, {}, causal, tight, {"r", 3, pairs::Source::Original}), BudgetViolation);
  // Fitting first makes the same data acceptable.
  auto fitted = fit_to_budget(train, causal, tight);
  ASSERT_FALSE(fitted.empty());
  EXPECT_NO_THROW(fine_tune_run(fitted, {}, causal, tight, {"r", 3, pairs::Source::Original}));
}

TEST(Manifest, RoundTripAndFingerprint) {
  auto train = synthetic::templated_pairs(6, 2);
  auto val = synthetic::templated_pairs(2, 8, "val");
  EchoAdapter echo;
  FineTuneConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 5;
  auto m = fine_tune_run(train, val, echo, cfg, {"run-x", 3, pairs::Source::Rewritten});
  EXPECT_EQ(m.run_id, "run-x");
  EXPECT_EQ(m.model_id, "echo");
  EXPECT_EQ(m.k, 3u);
  EXPECT_EQ(m.train_count, 6u);
  EXPECT_EQ(m.validation_losses.size(), 3u);

  auto back = manifest_from_json(to_json(m));
  EXPECT_EQ(back.run_id, m.run_id);
  EXPECT_EQ(back.data_source, pairs::Source::Rewritten);
  EXPECT_EQ(back.config.seed, 5u);
  EXPECT_EQ(back.dataset_fingerprint, m.dataset_fingerprint);
  EXPECT_EQ(back.validation_losses, m.validation_losses);

  auto reversed = train;
  std::reverse(reversed.begin(), reversed.end());
  EXPECT_EQ(dataset_fingerprint(reversed, val), dataset_fingerprint(train, val));
  auto changed = train;
  changed[0].argument_summary += " Extra.";
  EXPECT_NE(dataset_fingerprint(changed, val), dataset_fingerprint(train, val));
  EXPECT_EQ(dataset_fingerprint(train).size(), 64u);
}

TEST(Records, JsonlRoundTrip) {
  TempDir dir;
  GenerationRecord r{"d", "facts \"q\".", "gen.", "ref.", "run", false};
  GenerationRecord e{"e", "f.", "", "ref.", "run", true};
  write_generations(dir / "g.jsonl", {r, e});
  auto back = read_generations(dir / "g.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], r);
  EXPECT_EQ(back[1], e);
}

}  // namespace
