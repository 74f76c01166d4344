// Serial reference vs OpenMP kernels on synthetic corpora.

#include <benchmark/benchmark.h>

#include "itemdeps/depgraph.hpp"
#include "itemdeps/minimizer.hpp"
#include "itemdeps/oracle.hpp"
#include "synthetic.hpp"

namespace {

using namespace itemdeps;

const Corpus& bench_corpus() {
  static const Corpus corpus = [] {
    testing::Rng rng(7);
    testing::SyntheticParams params;
    params.items = 2000;
    return testing::synthetic_corpus(rng, params);
  }();
  return corpus;
}

const DependencyGraph& bench_graph() {
  static const DependencyGraph graph = [] {
    const auto& corpus = bench_corpus();
    BuiltinOracle oracle(corpus);
    auto results = minimize_corpus(corpus, oracle, {}, 1);
    return build_graph(results, corpus).graph;
  }();
  return graph;
}

void BM_MinimizeCorpusSerial(benchmark::State& state) {
  const auto& corpus = bench_corpus();
  BuiltinOracle oracle(corpus);
  const Strategy strategy{state.range(0) == 0 ? StrategyKind::linear : StrategyKind::ddmin};
  for (auto _ : state) benchmark::DoNotOptimize(minimize_corpus_serial(corpus, oracle, strategy));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus.size()));
}
BENCHMARK(BM_MinimizeCorpusSerial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MinimizeCorpusParallel(benchmark::State& state) {
  const auto& corpus = bench_corpus();
  BuiltinOracle oracle(corpus);
  const Strategy strategy{state.range(0) == 0 ? StrategyKind::linear : StrategyKind::ddmin};
  const auto jobs = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(minimize_corpus(corpus, oracle, strategy, jobs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus.size()));
}
BENCHMARK(BM_MinimizeCorpusParallel)
    ->ArgsProduct({{0, 1}, {1, 2, 4, 8}})
    ->UseRealTime()
    ->Unit(benchmark::kMillisecond);

void BM_TransitiveReductionSerial(benchmark::State& state) {
  const auto& g = bench_graph();
  for (auto _ : state) benchmark::DoNotOptimize(transitive_reduction_serial(g));
}
BENCHMARK(BM_TransitiveReductionSerial)->Unit(benchmark::kMillisecond);

void BM_TransitiveReductionParallel(benchmark::State& state) {
  const auto& g = bench_graph();
  const auto jobs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(transitive_reduction(g, jobs));
}
BENCHMARK(BM_TransitiveReductionParallel)
    ->Arg(1)
    ->Arg(2)
    ->Arg(4)
    ->Arg(8)
    ->UseRealTime()
    ->Unit(benchmark::kMillisecond);

void BM_ReachableQuery(benchmark::State& state) {
  const auto& g = bench_graph();
  testing::Rng rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, g.node_count() - 1);
  for (auto _ : state) {
    auto a = g.node(pick(rng)).id;
    auto b = g.node(pick(rng)).id;
    benchmark::DoNotOptimize(reachable(g, a, b));
  }
}
BENCHMARK(BM_ReachableQuery);

}  // namespace

BENCHMARK_MAIN();
