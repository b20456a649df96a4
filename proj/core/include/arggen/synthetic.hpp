#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "arggen/corpus.hpp"
#include "arggen/pair_builder.hpp"
#include "arggen/random.hpp"

// Generators for the bundled synthetic data. Every sentence carries exactly
// one cue from the keyword baseline, so keyword_rule recovers its label.
namespace arggen::synthetic {

std::string sentence_for(corpus::RhetoricalLabel label, Rng& rng);

// Gold-labelled documents with labels in random order per document.
std::vector<corpus::CaseDocument> separable_corpus(std::size_t docs, std::uint64_t seed,
                                                   std::size_t min_sentences = 6, std::size_t max_sentences = 14);

struct RawDocument {
  std::string doc_id;
  std::string text;
};

struct BundledCorpus {
  std::vector<corpus::CaseDocument> gold;
  std::vector<RawDocument> automatic;  // unlabeled raw text
};

// Judgment-shaped documents: facts first, then lower-court history and the
// parties' arguments, then the court's reasoning and ruling. Every document
// has at least `min_role_sentences` facts and ratio sentences.
BundledCorpus bundled_corpus(std::uint64_t seed, std::size_t gold_docs = 50, std::size_t auto_docs = 50,
                             std::size_t min_role_sentences = 6);

// gold.jsonl plus auto/<doc_id>.txt under `dir`.
void write_bundled_corpus(const std::filesystem::path& dir, const BundledCorpus& corpus);

// Fact -> argument pairs where the argument restates entities from the facts
// through one of a few fixed templates; the template is picked by the kind of
// dispute described in the facts.
std::vector<pairs::FactArgumentPair> templated_pairs(std::size_t count, std::uint64_t seed,
                                                     const std::string& id_prefix = "tpl");

}  // namespace arggen::synthetic
