#include <benchmark/benchmark.h>

#include "arggen/evaluator.hpp"
#include "arggen/synthetic.hpp"

namespace {

using namespace arggen;

void BM_WordOverlap(benchmark::State& state) {
  const auto pairs = synthetic::templated_pairs(50, 1);
  for (auto _ : state) {
    for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
      benchmark::DoNotOptimize(evaluator::word_overlap(pairs[i].argument_summary, pairs[i + 1].argument_summary));
    }
  }
}
BENCHMARK(BM_WordOverlap);

void BM_SemanticSimilarity(benchmark::State& state) {
  const auto pairs = synthetic::templated_pairs(50, 1);
  embedding::HashingEmbeddingProvider provider(256);
  for (auto _ : state) {
    for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
      benchmark::DoNotOptimize(
          evaluator::semantic_similarity(pairs[i].facts_summary, pairs[i + 1].facts_summary, provider));
    }
  }
}
BENCHMARK(BM_SemanticSimilarity);

}  // namespace
