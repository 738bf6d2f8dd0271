#include <benchmark/benchmark.h>

#include "kglink/errors.hpp"
#include "kglink/query_graph.hpp"
#include "bench_common.hpp"

using namespace kglink;

static void BM_ExtractSubgraph(benchmark::State& state) {
  const auto& data = bench::corpus();
  const int l_max = static_cast<int>(state.range(0));
  size_t i = 0;
  for (auto _ : state) {
    const auto& q = data.queries[i++ % data.queries.size()];
    try {
      QueryGraph qg = extract_subgraph(data.synth.kb, q.source, q.target, l_max);
      benchmark::DoNotOptimize(qg.num_edges());
    } catch (const EmptyGraphError&) {
    }
  }
}
BENCHMARK(BM_ExtractSubgraph)->Arg(2)->Arg(3)->Arg(4);

static void BM_BuildIncidence(benchmark::State& state) {
  const auto& data = bench::corpus();
  const auto& q = data.queries.front();
  QueryGraph qg = extract_subgraph(data.synth.kb, q.source, q.target, 3);
  for (auto _ : state) {
    auto [s, t] = build_incidence(qg);
    benchmark::DoNotOptimize(s.numel() + t.numel());
  }
}
BENCHMARK(BM_BuildIncidence);
