#include <benchmark/benchmark.h>

#include <random>

#include "arggen/crf.hpp"

namespace {

using namespace arggen::crf;

struct Instance {
  EmissionMatrix em;
  CrfParameters p;
  std::vector<int> gold;
};

Instance make_instance(std::size_t n, std::size_t L) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  Instance in{EmissionMatrix(n, L), CrfParameters::zeros(L), std::vector<int>(n)};
  for (Eigen::Index i = 0; i < in.em.size(); ++i) in.em.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < in.p.transitions.size(); ++i) in.p.transitions.data()[i] = u(rng);
  for (auto& y : in.gold) y = static_cast<int>(rng() % L);
  return in;
}

void BM_Viterbi(benchmark::State& state) {
  auto in = make_instance(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(viterbi_decode(in.em, in.p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Viterbi)->Arg(50)->Arg(200)->Arg(1000);

void BM_NllAndGradient(benchmark::State& state) {
  auto in = make_instance(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(nll_and_gradient(in.em, in.p, in.gold));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NllAndGradient)->Arg(50)->Arg(200)->Arg(1000);

}  // namespace
