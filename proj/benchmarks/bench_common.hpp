#pragma once

#include "kglink/queries.hpp"
#include "kglink/synth.hpp"

namespace bench {

struct Corpus {
  kglink::SynthOutput synth;
  kglink::TargetVocab vocab;
  std::vector<kglink::ResolvedQuery> queries;
};

inline const Corpus& corpus() {
  static Corpus c = [] {
    kglink::SynthSpec spec;
    spec.entities = 300;
    spec.base_relations = 10;
    spec.rules = 4;
    spec.density = 0.02;
    spec.seed = 7;
    Corpus out;
    out.synth = kglink::generate(spec);
    out.vocab = kglink::TargetVocab::from_queries(out.synth.train_queries);
    out.queries =
        kglink::resolve_queries(out.synth.kb, out.synth.train_queries, out.vocab);
    return out;
  }();
  return c;
}

}  // namespace bench
