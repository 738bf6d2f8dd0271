#include <benchmark/benchmark.h>

#include "kglink/train.hpp"
#include "bench_common.hpp"

using namespace kglink;

// One optimizer step end to end: batching, forward, backward, Adam.
static void BM_TrainStep(benchmark::State& state) {
  const auto& data = bench::corpus();
  ModelConfig mcfg;
  mcfg.dim = 32;
  mcfg.t_max = 8;
  mcfg.classes = data.vocab.classes();
  mcfg.variant = Variant::Sum;
  TrainConfig tcfg;
  tcfg.batch = 10;
  tcfg.steps_per_epoch = 1;
  tcfg.epochs = 1;
  tcfg.lr = 2e-3;
  tcfg.seed = 1;
  tcfg.l_max = 2;
  tcfg.checked = false;

  for (auto _ : state) {
    state.PauseTiming();
    Trainer trainer(data.synth.kb, data.vocab, data.queries, mcfg, tcfg);
    trainer.init_params();
    state.ResumeTiming();
    trainer.run();
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
