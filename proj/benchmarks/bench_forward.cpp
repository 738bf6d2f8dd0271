#include <benchmark/benchmark.h>

#include "kglink/errors.hpp"
#include "kglink/model.hpp"
#include "bench_common.hpp"

using namespace kglink;

namespace {

BatchedGraph make_batch(size_t batch_size, int l_max) {
  const auto& data = bench::corpus();
  std::vector<QueryGraph> graphs;
  for (const auto& q : data.queries) {
    if (graphs.size() == batch_size) break;
    try {
      graphs.push_back(extract_subgraph(data.synth.kb, q.source, q.target, l_max));
    } catch (const EmptyGraphError&) {
    }
  }
  return batch_graphs(graphs);
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
  const auto& data = bench::corpus();
  ModelConfig cfg;
  cfg.dim = 32;
  cfg.t_max = static_cast<size_t>(state.range(0));
  cfg.classes = data.vocab.classes();
  cfg.variant = Variant::Sum;
  ModelParams params = ModelParams::init(cfg, data.synth.kb.num_types(),
                                         data.synth.kb.num_relations(), 1);
  BatchedGraph bg = make_batch(10, 2);
  for (auto _ : state) {
    Tensor logits = forward(bg, params, cfg, false);
    benchmark::DoNotOptimize(logits.at(0, 0));
  }
  state.counters["nodes"] = static_cast<double>(bg.num_nodes());
  state.counters["edges"] = static_cast<double>(bg.num_edges());
}
BENCHMARK(BM_Forward)->Arg(4)->Arg(8)->Arg(25);
