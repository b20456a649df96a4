#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "arggen/corpus.hpp"
#include "arggen/synthetic.hpp"
#include "test_support.hpp"

namespace {

using namespace arggen;
using namespace arggen::corpus;
using arggen::testing::TempDir;

CaseDocument gold_doc(const std::string& id, std::vector<RhetoricalLabel> labels) {
  CaseDocument d;
  d.doc_id = id;
  d.provenance = Provenance::GoldAnnotated;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    d.sentences.push_back({i, "Sentence " + std::to_string(i) + " of " + id + ".", labels[i], LabelSource::Gold, {}});
  }
  return d;
}

CaseDocument auto_doc(const std::string& id) { return make_document(id, "One here. Two there."); }

void write(const std::filesystem::path& p, const std::string& s) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p) << s;
}

TEST(Labels, SevenStableCodes) {
  ASSERT_EQ(kAllLabels.size(), 7u);
  for (int c = 0; c < 7; ++c) {
    EXPECT_EQ(label_code(label_from_code(c)), c);
    EXPECT_EQ(parse_label(to_string(label_from_code(c))), label_from_code(c));
  }
  EXPECT_EQ(label_code(RhetoricalLabel::Facts), 0);
  EXPECT_EQ(label_code(RhetoricalLabel::RatioOfDecision), 5);
  EXPECT_EQ(label_code(RhetoricalLabel::RulingPresent), 6);
  EXPECT_ARGGEN_ERROR(label_from_code(7), InvalidLabel);
  EXPECT_ARGGEN_ERROR(parse_label("Holding"), InvalidLabel);
}

TEST(Segment, SplitsAtTerminalPunctuation) {
  EXPECT_EQ(segment_sentences("The appeal fails. Costs awarded."),
            (std::vector<std::string>{"The appeal fails.", "Costs awarded."}));
}

TEST(Segment, AbbreviationSuppressesSplit) {
  EXPECT_EQ(segment_sentences("State v. Rao was cited."), (std::vector<std::string>{"State v. Rao was cited."}));
}

TEST(Segment, TwentyJoinedSentencesWithAbbreviations) {
  std::vector<std::string> built;
  const std::vector<std::string> pieces = {
      "The matter came up before Hon. Justice Rao.", "It concerned Sec. 4 of the Act.",
      "Is the claim barred?",                        "It is not!",
      "Dr. Mehta gave evidence.",                    "Mr. Singh and Mrs. Singh were present.",
      "The case of State vs. Lal No. 12 was cited.", "Art. 14 was also argued.",
  };
  for (std::size_t i = 0; i < 20; ++i) built.push_back(pieces[i % pieces.size()]);
  std::string joined;
  for (const auto& s : built) joined += s + " ";
  EXPECT_EQ(segment_sentences(joined), built);
}

TEST(Segment, EmptyInputIsAnError) {
  EXPECT_ARGGEN_ERROR(segment_sentences(""), EmptyDocument);
  EXPECT_ARGGEN_ERROR(segment_sentences(" \n\t "), EmptyDocument);
}

TEST(Segment, NoSplitBeforeLowercase) {
  EXPECT_EQ(segment_sentences("He paid. then he left."), (std::vector<std::string>{"He paid. then he left."}));
}

TEST(Validate, RecordInvariants) {
  auto d = gold_doc("g", {RhetoricalLabel::Facts, RhetoricalLabel::Argument});
  EXPECT_NO_THROW(validate(d));

  auto gap = d;
  gap.sentences[1].index = 2;
  EXPECT_ARGGEN_ERROR(validate(gap), InvalidRecord);

  auto blank = d;
  blank.sentences[0].text = "   ";
  EXPECT_ARGGEN_ERROR(validate(blank), InvalidRecord);

  auto inconsistent = d;
  inconsistent.sentences[0].label.reset();
  EXPECT_ARGGEN_ERROR(validate(inconsistent), InvalidRecord);

  auto unlabeled_gold = d;
  unlabeled_gold.sentences[0].label.reset();
  unlabeled_gold.sentences[0].label_source = LabelSource::None;
  EXPECT_ARGGEN_ERROR(validate(unlabeled_gold), InvalidRecord);
}

TEST(Json, RoundTripKeepsEveryField) {
  auto d = gold_doc("g1", {RhetoricalLabel::Facts, RhetoricalLabel::Statute});
  d.split = Split::Test;
  d.sentences[1].label = RhetoricalLabel::Precedent;
  d.sentences[1].label_source = LabelSource::Predicted;
  d.sentences[1].gold_label = RhetoricalLabel::Statute;
  EXPECT_EQ(parse_json_line(to_json_line(d)), d);
}

TEST(Json, LabelNameMapsToCode) {
  auto d = parse_json_line(
      R"({"doc_id":"x","provenance":"gold_annotated","split":"unassigned","sentences":[{"index":0,"text":"A.","label":"Facts","label_source":"gold"}]})");
  ASSERT_TRUE(d.sentences[0].label);
  EXPECT_EQ(label_code(*d.sentences[0].label), 0);
}

TEST(Load, FiftyGoldRecords) {
  TempDir dir;
  auto bundle = synthetic::bundled_corpus(3, 50, 0);
  for (auto& d : bundle.gold) d.provenance = Provenance::GoldAnnotated;
  write_corpus(dir / "gold.jsonl", bundle.gold);
  auto docs = load_corpus(dir / "gold.jsonl", Provenance::GoldAnnotated);
  ASSERT_EQ(docs.size(), 50u);
  for (const auto& d : docs) EXPECT_EQ(d.provenance, Provenance::GoldAnnotated);
}

TEST(Load, EmptyFileGivesNoDocuments) {
  TempDir dir;
  write(dir / "empty.jsonl", "");
  EXPECT_TRUE(load_corpus(dir / "empty.jsonl").empty());
}

TEST(Load, MalformedLineReportsLineNumber) {
  TempDir dir;
  std::ostringstream good;
  write_corpus(good, {gold_doc("a", {RhetoricalLabel::Facts})});
  write(dir / "bad.jsonl", good.str() + "{not json\n");
  try {
    load_corpus(dir / "bad.jsonl");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Load, DuplicateIdsRejected) {
  TempDir dir;
  write_corpus(dir / "dup.jsonl", {gold_doc("a", {RhetoricalLabel::Facts}), gold_doc("a", {RhetoricalLabel::Facts})});
  EXPECT_ARGGEN_ERROR(load_corpus(dir / "dup.jsonl"), DuplicateId);
}

TEST(Load, ProvenanceMismatchRejected) {
  TempDir dir;
  write_corpus(dir / "g.jsonl", {gold_doc("a", {RhetoricalLabel::Facts})});
  EXPECT_ARGGEN_ERROR(load_corpus(dir / "g.jsonl", Provenance::AutoLabeled), ParseError);
}

TEST(Load, DirectoryOfTextFiles) {
  TempDir dir;
  write(dir / "c" / "b.txt", "Second file. Two sentences.");
  write(dir / "c" / "a.txt", "First file.");
  write(dir / "c" / "ignored.md", "Not read.");
  auto docs = load_corpus(dir / "c", Provenance::AutoLabeled);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].doc_id, "a");
  EXPECT_EQ(docs[1].doc_id, "b");
  EXPECT_EQ(docs[1].sentences.size(), 2u);
  EXPECT_EQ(docs[1].sentences[0].label_source, LabelSource::None);
}

std::vector<CaseDocument> hundred_docs() {
  std::vector<CaseDocument> docs;
  for (int i = 0; i < 50; ++i) docs.push_back(gold_doc("g" + std::to_string(i), {RhetoricalLabel::Facts}));
  for (int i = 0; i < 50; ++i) docs.push_back(auto_doc("a" + std::to_string(i)));
  return docs;
}

TEST(Split, TableOneCountsWithGoldTest) {
  auto out = split_corpus(hundred_docs(), 7, {70, 10, 20});
  std::map<Split, std::size_t> count;
  for (const auto& d : out) {
    ++count[d.split];
    if (d.split == Split::Test) EXPECT_EQ(d.provenance, Provenance::GoldAnnotated);
  }
  EXPECT_EQ(count[Split::Train], 70u);
  EXPECT_EQ(count[Split::Validation], 10u);
  EXPECT_EQ(count[Split::Test], 20u);
}

TEST(Split, AllTest) {
  std::vector<CaseDocument> docs;
  for (int i = 0; i < 5; ++i) docs.push_back(gold_doc("g" + std::to_string(i), {RhetoricalLabel::Facts}));
  for (const auto& d : split_corpus(docs, 1, {0, 0, 5})) EXPECT_EQ(d.split, Split::Test);
}

TEST(Split, DeterministicAndOrderIndependent) {
  auto docs = hundred_docs();
  auto a = split_corpus(docs, 11, {70, 10, 20});
  std::reverse(docs.begin(), docs.end());
  auto b = split_corpus(docs, 11, {70, 10, 20});
  std::map<std::string, Split> sa, sb;
  for (const auto& d : a) sa[d.doc_id] = d.split;
  for (const auto& d : b) sb[d.doc_id] = d.split;
  EXPECT_EQ(sa, sb);
  auto c = split_corpus(hundred_docs(), 12, {70, 10, 20});
  std::map<std::string, Split> sc;
  for (const auto& d : c) sc[d.doc_id] = d.split;
  EXPECT_NE(sa, sc);
}

TEST(Split, Errors) {
  EXPECT_ARGGEN_ERROR(split_corpus(hundred_docs(), 1, {70, 10, 10}), SplitArity);
  std::vector<CaseDocument> few = {gold_doc("g", {RhetoricalLabel::Facts}), auto_doc("a1"), auto_doc("a2")};
  EXPECT_ARGGEN_ERROR(split_corpus(few, 1, {1, 0, 2}), InsufficientGold);
}

TEST(Stats, HandComputedMeans) {
  auto mk = [](const std::string& id, std::size_t words, std::size_t sentences) {
    CaseDocument d;
    d.doc_id = id;
    d.split = Split::Train;
    for (std::size_t s = 0; s < sentences; ++s) {
      std::string text;
      for (std::size_t w = 0; w < words / sentences; ++w) text += "w ";
      d.sentences.push_back({s, text, {}, LabelSource::None, {}});
    }
    return d;
  };
  auto rows = corpus_stats({mk("a", 10, 2), mk("b", 20, 4)});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].split, Split::Train);
  EXPECT_EQ(rows[0].doc_count, 2u);
  EXPECT_DOUBLE_EQ(rows[0].avg_words, 15.0);
  EXPECT_DOUBLE_EQ(rows[0].avg_sentences, 3.0);

  auto single = corpus_stats({mk("a", 12, 3)});
  EXPECT_DOUBLE_EQ(single[0].avg_words, 12.0);
  EXPECT_DOUBLE_EQ(single[0].avg_sentences, 3.0);
  EXPECT_TRUE(corpus_stats({}).empty());
}

}  // namespace
