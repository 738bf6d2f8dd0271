#pragma once

// Shared fixtures for model-level tests: hand-built query graphs and an
// end-to-end finite-difference gradient check.

#include <string>
#include <vector>

#include "kglink/model.hpp"
#include "kglink/query_graph.hpp"
#include "kglink/rng.hpp"
#include "kglink/tape.hpp"
#include "oracles.hpp"

namespace fixtures {

using namespace kglink;

// Query graph assembled directly (no KB): edge 0 is the fake fact between
// local nodes 0 and 1.
inline QueryGraph make_graph(size_t num_nodes,
                             const std::vector<std::tuple<uint32_t, uint32_t, int64_t>>& real_edges,
                             std::vector<std::vector<TypeId>> node_types) {
  QueryGraph qg;
  qg.local_source = 0;
  qg.local_target = 1;
  for (size_t i = 0; i < num_nodes; ++i) qg.nodes.push_back(static_cast<EntityId>(i));
  qg.edges.push_back({0, 1, QueryGraph::kFakeRelation, QueryGraph::kNoFact});
  for (const auto& [s, t, r] : real_edges) {
    qg.edges.push_back({s, t, r, static_cast<FactId>(qg.edges.size() - 1)});
  }
  if (node_types.empty()) node_types.resize(num_nodes);
  qg.node_types = std::move(node_types);
  qg.path_count = 1;
  qg.avg_path_length = 1.0;
  return qg;
}

inline QueryGraph random_graph(Rng& rng, size_t max_nodes, size_t num_relations,
                               size_t num_types) {
  const size_t n = 2 + rng.below(max_nodes - 1);
  std::vector<std::tuple<uint32_t, uint32_t, int64_t>> edges;
  const size_t m = 1 + rng.below(2 * n);
  for (size_t i = 0; i < m; ++i) {
    uint32_t s = static_cast<uint32_t>(rng.below(n));
    uint32_t t = static_cast<uint32_t>(rng.below(n));
    if (s == t) t = (t + 1) % n;
    edges.push_back({s, t, static_cast<int64_t>(rng.below(num_relations))});
  }
  std::vector<std::vector<TypeId>> types(n);
  for (auto& list : types) {
    const size_t k = rng.below(3);  // 0..2 types per node
    for (size_t i = 0; i < k; ++i) {
      TypeId t = static_cast<TypeId>(rng.below(num_types));
      if (std::find(list.begin(), list.end(), t) == list.end()) list.push_back(t);
    }
  }
  return make_graph(n, edges, std::move(types));
}

// Nudges every parameter off its structured init point (zero biases, unit
// gains) so gradient checks run at a generic point: with fresh init, untyped
// entities produce exactly-zero rows and relu pre-activations sit exactly on
// the kink, where central differences measure the average of the one-sided
// slopes instead of the subgradient.
inline void jitter_params(ModelParams& params, uint64_t seed, double radius = 0.05) {
  Rng rng(seed);
  params.for_each([&](const std::string&, Tensor& t) {
    for (double& v : t.data()) v += rng.uniform(-radius, radius);
  });
}

inline double model_loss(const BatchedGraph& graph, const ModelParams& params,
                         const ModelConfig& config, const std::vector<int>& labels) {
  Tape tape(true);
  BoundParams bound = bind_params(tape, params);
  Var logits = forward_on_tape(tape, graph, bound, config);
  Var loss = tape.softmax_cross_entropy(
      logits, tape.constant(one_hot(labels, config.classes)));
  return tape.value(loss).item();
}

// Full-model gradient check: analytic gradients for every parameter against
// central finite differences of the loss.
inline oracle::GradCheck model_grad_check(const BatchedGraph& graph,
                                          ModelParams& params,
                                          const ModelConfig& config,
                                          const std::vector<int>& labels,
                                          double h = 1e-5) {
  std::vector<Tensor> analytic;
  std::vector<std::string> names;
  {
    Tape tape(true);
    BoundParams bound = bind_params(tape, params);
    Var logits = forward_on_tape(tape, graph, bound, config);
    Var loss = tape.softmax_cross_entropy(
        logits, tape.constant(one_hot(labels, config.classes)));
    tape.backward(loss);
    size_t slot = 0;
    params.for_each([&](const std::string& name, Tensor&) {
      analytic.push_back(tape.grad(bound.flat[slot]));
      names.push_back(name);
      ++slot;
    });
  }

  oracle::GradCheck gc;
  size_t slot = 0;
  params.for_each([&](const std::string& name, Tensor& t) {
    for (size_t i = 0; i < t.numel(); ++i) {
      const double fd = oracle::central_difference(
          [&]() { return model_loss(graph, params, config, labels); },
          &t.data()[i], h);
      oracle::check_component(gc, name + "[" + std::to_string(i) + "]",
                              analytic[slot].data()[i], fd);
    }
    ++slot;
  });
  return gc;
}

}  // namespace fixtures
