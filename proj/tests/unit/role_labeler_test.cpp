#include <gtest/gtest.h>

#include "arggen/role_labeler.hpp"
#include "arggen/synthetic.hpp"
#include "test_support.hpp"

namespace {

using namespace arggen;
using namespace arggen::labeler;
using corpus::RhetoricalLabel;
using arggen::testing::TempDir;

std::unique_ptr<SentenceEncoder> keyword_encoder() {
  return std::make_unique<LinearEncoder>(std::make_unique<KeywordFeatures>(baseline_keywords()));
}

LabelerConfig fast_config(std::uint64_t seed) {
  LabelerConfig c;
  c.batch_size = 4;
  c.learning_rate = 0.5;
  c.max_epochs = 50;
  c.patience = 50;
  c.seed = seed;
  return c;
}

TEST(KeywordRule, FirstMatchWins) {
  EXPECT_EQ(keyword_rule("We have held that the sale is void."), RhetoricalLabel::RatioOfDecision);
  EXPECT_EQ(keyword_rule("The appeal is allowed."), RhetoricalLabel::RulingPresent);
  EXPECT_EQ(keyword_rule("The High Court dismissed the suit."), RhetoricalLabel::RulingLower);
  EXPECT_EQ(keyword_rule("Section 9 applies."), RhetoricalLabel::Statute);
  EXPECT_EQ(keyword_rule("Counsel relied on an old case."), RhetoricalLabel::Precedent);
  EXPECT_EQ(keyword_rule("Counsel for the State argued."), RhetoricalLabel::Argument);
  EXPECT_EQ(keyword_rule("The land was sold in 1990."), RhetoricalLabel::Facts);
  EXPECT_EQ(keyword_rule("The High Court held that Section 9 applies."), RhetoricalLabel::RatioOfDecision);
}

TEST(KeywordBaseline, LabelsEverySentence) {
  auto doc = corpus::make_document("d", "The land was sold. Section 4 applies. We direct payment.");
  auto out = keyword_baseline_labeler(doc);
  ASSERT_EQ(out.sentences.size(), 3u);
  EXPECT_EQ(out.sentences[0].label, RhetoricalLabel::Facts);
  EXPECT_EQ(out.sentences[1].label, RhetoricalLabel::Statute);
  EXPECT_EQ(out.sentences[2].label, RhetoricalLabel::RulingPresent);
  for (const auto& s : out.sentences) EXPECT_EQ(s.label_source, corpus::LabelSource::Predicted);
}

TEST(Features, HashedNgramsAreBinaryAndDeterministic) {
  HashedNgramFeatures f(64);
  auto a = f.extract("the appeal the appeal");
  auto b = f.extract("the appeal the appeal");
  EXPECT_EQ(a, b);
  for (auto& [idx, v] : a) {
    EXPECT_LT(idx, 64u);
    EXPECT_DOUBLE_EQ(v, 1.0);
  }
}

TEST(Train, SeparableCorpusReachesFullAccuracy) {
  auto train = synthetic::separable_corpus(30, 1);
  auto val = synthetic::separable_corpus(8, 2);
  auto trained = train_labeler(train, val, keyword_encoder(), fast_config(4));
  EXPECT_DOUBLE_EQ(trained.best_validation_accuracy, 1.0);
  EXPECT_LE(trained.best_epoch, 50u);
  EXPECT_DOUBLE_EQ(sentence_accuracy(trained.model, val), 1.0);
}

TEST(Train, SameSeedSameParameters) {
  auto train = synthetic::separable_corpus(10, 1);
  auto val = synthetic::separable_corpus(3, 2);
  auto cfg = fast_config(9);
  cfg.max_epochs = 5;
  auto a = train_labeler(train, val, keyword_encoder(), cfg);
  auto b = train_labeler(train, val, keyword_encoder(), cfg);
  EXPECT_EQ(a.model.encoder().parameters(), b.model.encoder().parameters());
  EXPECT_TRUE(a.model.crf().transitions == b.model.crf().transitions);
  EXPECT_EQ(a.best_epoch, b.best_epoch);
}

TEST(Train, Errors) {
  EXPECT_ARGGEN_ERROR(train_labeler({}, {}, keyword_encoder(), {}), MissingData);
  auto unlabeled = corpus::make_document("u", "A sentence. Another one.");
  EXPECT_ARGGEN_ERROR(train_labeler({unlabeled}, {}, keyword_encoder(), {}), MissingGoldLabel);
}

TEST(LabelDocument, ArityPredictionsAndGoldPreservation) {
  auto train = synthetic::separable_corpus(30, 1);
  auto trained = train_labeler(train, {}, keyword_encoder(), fast_config(4));

  auto doc = synthetic::separable_corpus(1, 77, 5, 5).front();
  ASSERT_EQ(doc.sentences.size(), 5u);
  auto out = label_document(doc, trained.model);
  ASSERT_EQ(out.sentences.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(out.sentences[i].label_source, corpus::LabelSource::Predicted);
    EXPECT_EQ(out.sentences[i].label, keyword_rule(doc.sentences[i].text));
    EXPECT_EQ(out.sentences[i].gold_label, doc.sentences[i].label);
    EXPECT_EQ(out.sentences[i].gold(), doc.sentences[i].label);
  }
  EXPECT_NO_THROW(corpus::validate(out));

  corpus::CaseDocument empty;
  empty.doc_id = "e";
  EXPECT_ARGGEN_ERROR(label_document(empty, trained.model), EmptyDocument);
}

TEST(Artifact, SaveLoadGivesIdenticalPredictions) {
  TempDir dir;
  auto train = synthetic::separable_corpus(12, 5);
  auto cfg = fast_config(2);
  cfg.max_epochs = 5;
  auto trained = train_labeler(train, {}, std::make_unique<LinearEncoder>(std::make_unique<HashedNgramFeatures>(512)), cfg);
  trained.model.save(dir / "model.json");
  auto loaded = LabelerModel::load(dir / "model.json");
  EXPECT_EQ(loaded.encoder().id(), "linear+hashed-ngrams");
  EXPECT_EQ(loaded.config().seed, 2u);
  for (const auto& d : synthetic::separable_corpus(4, 6)) {
    std::vector<std::string> texts;
    for (const auto& s : d.sentences) texts.push_back(s.text);
    EXPECT_EQ(loaded.predict(texts), trained.model.predict(texts));
  }
}

TEST(Encoder, GradientMatchesFiniteDifferences) {
  // d(loss)/dW through the encoder, with loss = sum of emissions * fixed weights.
  LinearEncoder enc(std::make_unique<HashedNgramFeatures>(16), 3);
  std::vector<double> params(enc.parameters().size());
  for (std::size_t i = 0; i < params.size(); ++i) params[i] = 0.01 * static_cast<double>(i % 7) - 0.03;
  enc.set_parameters(params);
  std::vector<std::string> sentences = {"the appeal fails", "costs are awarded"};
  Eigen::MatrixXd upstream(2, 3);
  upstream << 0.5, -1.0, 2.0, 1.5, 0.25, -0.75;
  auto loss = [&](const LinearEncoder& e) { return (e.encode(sentences).array() * upstream.array()).sum(); };

  enc.zero_gradient();
  enc.accumulate_gradient(sentences, upstream);
  // apply_gradient with lr = 1 subtracts the gradient; recover it from the parameter change.
  auto before = enc.parameters();
  enc.apply_gradient(1.0);
  auto after = enc.parameters();
  enc.set_parameters(before);
  const double h = 1e-6;
  for (std::size_t i = 0; i < before.size(); ++i) {
    auto p = before;
    p[i] += h;
    enc.set_parameters(p);
    const double up = loss(enc);
    p[i] -= 2 * h;
    enc.set_parameters(p);
    const double down = loss(enc);
    EXPECT_NEAR(before[i] - after[i], (up - down) / (2 * h), 1e-6);
  }
}

}  // namespace
