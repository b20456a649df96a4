#include "stages.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <memory>

#include "arggen/corpus.hpp"
#include "arggen/embedding.hpp"
#include "arggen/error.hpp"
#include "arggen/evaluator.hpp"
#include "arggen/generation.hpp"
#include "arggen/pair_builder.hpp"
#include "arggen/rewriter.hpp"
#include "arggen/role_labeler.hpp"
#include "arggen/synthetic.hpp"
#include "arggen/text.hpp"
#include "arggen/tiny_lm.hpp"

namespace arggen::cli {

namespace fs = std::filesystem;
using corpus::CaseDocument;
using corpus::Split;

namespace {

constexpr Split kPairSplits[] = {Split::Train, Split::Validation, Split::Test};

void require_artifact(const fs::path& path, std::string_view producer) {
  if (!fs::exists(path)) {
    throw Error(ErrorCode::StageDependencyError,
                "missing " + path.string() + " (produced by `arggen " + std::string(producer) + "`)");
  }
}

fs::path corpus_path(const PipelineConfig& c) { return c.work_dir / "corpus.jsonl"; }
fs::path labeled_path(const PipelineConfig& c) { return c.work_dir / "labeled.jsonl"; }
fs::path split_file(const fs::path& dir, Split split) { return dir / (std::string(corpus::to_string(split)) + ".jsonl"); }
fs::path records_path(const PipelineConfig& c) { return c.pairs_dir(c.k, pairs::Source::Original) / "rewrite_records.jsonl"; }
fs::path reviews_path(const PipelineConfig& c) { return c.pairs_dir(c.k, pairs::Source::Original) / "reviews.jsonl"; }

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << contents;
}

std::unique_ptr<generation::ModelAdapter> make_adapter(const std::string& model_id, pairs::Family family,
                                                       const generation::TinyLmConfig& tiny) {
  if (model_id == "echo") return std::make_unique<generation::EchoAdapter>(family);
  if (model_id == "tiny" || model_id == "tiny-causal" || model_id == "tiny-seq2seq") {
    return std::make_unique<generation::TinyLm>(family, tiny);
  }
  throw Error(ErrorCode::ConfigError, "unknown model '" + model_id + "'");
}

std::string split_label(Split split) {
  switch (split) {
    case Split::Train: return "Train Data";
    case Split::Validation: return "Validation Data";
    case Split::Test: return "Test Data";
    case Split::Unassigned: return "Unassigned";
  }
  return "";
}

bool fully_gold(const CaseDocument& doc) {
  if (doc.sentences.empty()) return false;
  for (const auto& s : doc.sentences) {
    if (!s.gold()) return false;
  }
  return true;
}

}  // namespace

void run_synth(const fs::path& out_dir, std::uint64_t seed, std::ostream& out) {
  auto bundle = synthetic::bundled_corpus(seed);
  synthetic::write_bundled_corpus(out_dir, bundle);
  out << "wrote " << bundle.gold.size() << " gold and " << bundle.automatic.size() << " auto documents to "
      << out_dir.string() << "\n";
}

void run_ingest(const PipelineConfig& c, std::ostream& out) {
  if (c.gold.empty()) throw Error(ErrorCode::ConfigError, "ingest needs --gold");
  if (!fs::exists(c.gold)) throw Error(ErrorCode::IoError, "no such path " + c.gold.string());
  auto docs = corpus::load_corpus(c.gold, corpus::Provenance::GoldAnnotated);
  if (!c.automatic.empty()) {
    if (!fs::exists(c.automatic)) throw Error(ErrorCode::IoError, "no such path " + c.automatic.string());
    auto extra = corpus::load_corpus(c.automatic, corpus::Provenance::AutoLabeled);
    docs.insert(docs.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
  }
  auto split = corpus::split_corpus(std::move(docs), c.seed, c.split);
  corpus::write_corpus(corpus_path(c), split);

  out << fmt::format("{:<16}  {:>5}  {:>10}  {:>14}\n", "Data Type", "#Docs", "#Avg Words", "#Avg Sentences");
  for (const auto& row : corpus::corpus_stats(split)) {
    out << fmt::format("{:<16}  {:>5}  {:>10.1f}  {:>14.1f}\n", split_label(row.split), row.doc_count,
                       row.avg_words, row.avg_sentences);
  }
}

void run_label(const PipelineConfig& c, std::ostream& out) {
  require_artifact(corpus_path(c), "ingest");
  auto docs = corpus::load_corpus(corpus_path(c));

  std::optional<labeler::LabelerModel> model;
  if (c.labeler == "crf") {
    std::vector<CaseDocument> train;
    std::vector<CaseDocument> validation;
    for (const auto& d : docs) {
      if (!fully_gold(d)) continue;
      if (d.split == Split::Train) train.push_back(d);
      if (d.split == Split::Validation) validation.push_back(d);
    }
    if (train.empty()) throw Error(ErrorCode::MissingData, "no gold-labelled training documents for the CRF labeler");
    auto encoder = std::make_unique<labeler::LinearEncoder>(std::make_unique<labeler::HashedNgramFeatures>());
    auto trained = labeler::train_labeler(train, validation, std::move(encoder), c.labeler_config);
    trained.model.save(c.work_dir / "labeler" / "model.json");
    out << fmt::format("crf labeler: best epoch {}, validation accuracy {:.4f}\n", trained.best_epoch,
                       trained.best_validation_accuracy);
    model.emplace(std::move(trained.model));
  }

  std::size_t relabeled = 0;
  for (auto& d : docs) {
    if (d.provenance == corpus::Provenance::GoldAnnotated && fully_gold(d) && !c.relabel_gold) continue;
    d = model ? labeler::label_document(d, *model) : labeler::keyword_baseline_labeler(d);
    ++relabeled;
  }
  if (model) {
    std::vector<CaseDocument> test;
    for (const auto& d : docs) {
      if (d.split == Split::Test && fully_gold(d)) test.push_back(d);
    }
    if (!test.empty()) {
      out << fmt::format("crf labeler: test accuracy {:.4f} over {} documents\n",
                         labeler::sentence_accuracy(*model, test), test.size());
    }
  }
  corpus::write_corpus(labeled_path(c), docs);
  out << "labeled " << relabeled << " of " << docs.size() << " documents with the " << c.labeler << " labeler\n";
}

void run_build_pairs(const PipelineConfig& c, std::ostream& out) {
  require_artifact(labeled_path(c), "label");
  auto docs = corpus::load_corpus(labeled_path(c));
  embedding::HashingEmbeddingProvider provider(c.embedding_dim);
  summarizer::SummaryConfig summary{c.k, c.seed, 100};
  const auto dir = c.pairs_dir(c.k, pairs::Source::Original);

  std::string excluded;
  for (auto split : kPairSplits) {
    std::vector<CaseDocument> subset;
    for (const auto& d : docs) {
      if (d.split == split) subset.push_back(d);
    }
    auto dataset = pairs::build_pairs(subset, provider, summary);
    pairs::write_pairs(split_file(dir, split), dataset.pairs);
    for (const auto& e : dataset.excluded) {
      excluded += nlohmann::json{{"doc_id", e.doc_id}, {"split", corpus::to_string(split)}, {"reason", e.reason}}.dump() + "\n";
    }
    out << fmt::format("{}: {} pairs, {} excluded\n", corpus::to_string(split), dataset.pairs.size(),
                       dataset.excluded.size());
  }
  write_file(dir / "excluded.jsonl", excluded);
}

void run_rewrite(const PipelineConfig& c, std::ostream& out) {
  const auto dir = c.pairs_dir(c.k, pairs::Source::Original);
  std::vector<pairs::FactArgumentPair> all;
  for (auto split : kPairSplits) {
    require_artifact(split_file(dir, split), "build-pairs");
    auto p = pairs::read_pairs(split_file(dir, split));
    all.insert(all.end(), p.begin(), p.end());
  }

  std::unique_ptr<rewrite::RewriteBackend> backend;
  if (c.rewrite_backend == "identity") {
    backend = std::make_unique<rewrite::IdentityBackend>(c.rewrite_settings);
  } else if (c.rewrite_backend == "upper") {
    backend = std::make_unique<rewrite::UppercaseBackend>();
  } else if (c.rewrite_backend == "http") {
    backend = rewrite::HttpChatBackend::from_environment(c.rewrite_url, c.rewrite_model, c.rewrite_settings);
  } else {
    throw Error(ErrorCode::ConfigError, "unknown rewrite backend '" + c.rewrite_backend + "'");
  }

  auto results = rewrite::rewrite_pairs(all, *backend, c.rewrite_concurrency);
  std::vector<rewrite::RewriteRecord> records;
  for (auto& r : results) {
    records.push_back(std::move(r.facts));
    records.push_back(std::move(r.argument));
  }
  rewrite::RewriteLedger::write_records(records_path(c), records);
  if (fs::exists(reviews_path(c))) {
    spdlog::warn("{} already exists; earlier decisions will be replayed onto the new records",
                 reviews_path(c).string());
  }
  out << "rewrote " << all.size() << " pairs (" << records.size() << " records) with " << backend->id() << "\n";
}

void run_review(const PipelineConfig& c, const ReviewOptions& options, std::istream& in, std::ostream& out) {
  require_artifact(records_path(c), "rewrite");
  rewrite::RewriteLedger ledger(records_path(c), reviews_path(c));
  const auto note = options.note.empty() ? std::nullopt : std::optional<std::string>(options.note);

  for (const auto& record : ledger.pending()) {
    if (options.mode == ReviewOptions::Mode::ApproveAll) {
      ledger.review(record.doc_id, record.field, rewrite::ReviewStatus::Approved, note);
      continue;
    }
    if (options.mode == ReviewOptions::Mode::RejectAll) {
      ledger.review(record.doc_id, record.field, rewrite::ReviewStatus::Rejected, note);
      continue;
    }
    out << "== " << record.doc_id << " / " << rewrite::to_string(record.field) << "\n"
        << rewrite::diff_report(record).text << "\n[a]pprove, [r]eject, [s]kip, [q]uit (optionally followed by a note): "
        << std::flush;
    std::string line;
    if (!std::getline(in, line)) break;
    line = text::trim(line);
    if (line.empty()) continue;
    std::optional<std::string> typed;
    if (line.size() > 1) {
      auto rest = text::trim(std::string_view(line).substr(1));
      if (!rest.empty()) typed = rest;
    }
    const char choice = line[0];
    if (choice == 'q') break;
    if (choice == 'a') ledger.review(record.doc_id, record.field, rewrite::ReviewStatus::Approved, typed ? typed : note);
    else if (choice == 'r') ledger.review(record.doc_id, record.field, rewrite::ReviewStatus::Rejected, typed ? typed : note);
  }

  const auto dir = c.pairs_dir(c.k, pairs::Source::Original);
  for (auto split : kPairSplits) {
    require_artifact(split_file(dir, split), "build-pairs");
    auto resolved = rewrite::resolve_pairs(pairs::read_pairs(split_file(dir, split)), ledger);
    pairs::write_pairs(split_file(c.pairs_dir(c.k, pairs::Source::Rewritten), split), resolved);
  }
  std::size_t approved = 0, rejected = 0, pending = 0;
  for (const auto& r : ledger.records()) {
    if (r.status == rewrite::ReviewStatus::Approved) ++approved;
    else if (r.status == rewrite::ReviewStatus::Rejected) ++rejected;
    else ++pending;
  }
  out << fmt::format("approved {}, rejected {}, pending {}\n", approved, rejected, pending);
}

void run_train(const PipelineConfig& c, std::ostream& out) {
  const auto dir = c.pairs_dir();
  const auto producer = c.source == pairs::Source::Original ? "build-pairs" : "review";
  require_artifact(split_file(dir, Split::Train), producer);
  require_artifact(split_file(dir, Split::Validation), producer);

  auto adapter = make_adapter(c.model, c.family, c.tiny);
  auto train = generation::fit_to_budget(pairs::read_pairs(split_file(dir, Split::Train)), *adapter, c.fine_tune);
  auto validation =
      generation::fit_to_budget(pairs::read_pairs(split_file(dir, Split::Validation)), *adapter, c.fine_tune);

  generation::RunInfo info{c.effective_run_id(), c.k, c.source};
  auto manifest = generation::fine_tune_run(train, validation, *adapter, c.fine_tune, info);
  manifest.checkpoint = "checkpoint";
  const auto run_dir = c.run_dir();
  adapter->save(run_dir / manifest.checkpoint);
  generation::write_manifest(run_dir / "manifest.json", manifest);
  out << "trained " << manifest.model_id << " on " << manifest.train_count << " pairs -> " << run_dir.string()
      << "\n";
}

void run_generate(const PipelineConfig& c, std::ostream& out) {
  const auto run_dir = c.run_dir();
  require_artifact(run_dir / "manifest.json", "train");
  auto manifest = generation::read_manifest(run_dir / "manifest.json");
  const auto test_file = split_file(c.pairs_dir(manifest.k, manifest.data_source), Split::Test);
  require_artifact(test_file, manifest.data_source == pairs::Source::Original ? "build-pairs" : "review");

  auto adapter = make_adapter(manifest.model_id, manifest.family, c.tiny);
  adapter->load(run_dir / manifest.checkpoint);
  auto test = pairs::read_pairs(test_file);
  if (auto* echo = dynamic_cast<generation::EchoAdapter*>(adapter.get())) {
    // The echo oracle answers test prompts with their references.
    for (const auto& p : test) echo->add_reference(generation::test_prompt(p, *echo, manifest.config), p.argument_summary);
  }
  auto records = generation::generate_for_test(test, *adapter, manifest, c.generation);
  generation::write_generations(run_dir / "generations.jsonl", records);
  std::size_t empty = 0;
  for (const auto& r : records) empty += r.empty_generation;
  out << "generated " << records.size() << " arguments (" << empty << " empty) -> "
      << (run_dir / "generations.jsonl").string() << "\n";
}

void run_evaluate(const PipelineConfig& c, std::ostream& out) {
  const auto run_dir = c.run_dir();
  require_artifact(run_dir / "manifest.json", "train");
  require_artifact(run_dir / "generations.jsonl", "generate");
  auto manifest = generation::read_manifest(run_dir / "manifest.json");
  auto records = generation::read_generations(run_dir / "generations.jsonl");
  embedding::HashingEmbeddingProvider provider(c.embedding_dim);
  evaluator::EvaluationOptions options{c.overlap, c.source_label};
  auto report = evaluator::evaluate_run(records, provider, manifest, options);
  evaluator::write_details(run_dir / "evaluation.jsonl", report.details);
  evaluator::write_metric_row(run_dir / "metrics.json", report.rows.front());
  out << evaluator::render_table(report.rows);
}

void run_report(const ReportOptions& options, std::ostream& out) {
  if (options.runs.empty()) throw Error(ErrorCode::ConfigError, "report needs at least one run directory");
  std::vector<evaluator::MetricRow> rows;
  for (const auto& dir : options.runs) {
    require_artifact(dir / "metrics.json", "evaluate");
    rows.push_back(evaluator::read_metric_row(dir / "metrics.json"));
  }
  if (!options.csv.empty()) write_file(options.csv, evaluator::render_csv(rows));
  if (!options.latex.empty()) write_file(options.latex, evaluator::render_latex(rows));
  if (options.format == "csv") out << evaluator::render_csv(rows);
  else if (options.format == "latex") out << evaluator::render_latex(rows);
  else if (options.format == "text") out << evaluator::render_table(rows);
  else throw Error(ErrorCode::ConfigError, "unknown report format '" + options.format + "'");
}

}  // namespace arggen::cli
