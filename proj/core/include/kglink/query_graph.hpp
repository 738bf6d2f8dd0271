#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kglink/kb.hpp"
#include "kglink/tensor.hpp"

namespace kglink {

// Per-query subgraph: the union of all simple undirected paths between the
// query pair of length <= the bound, plus the fake unknown fact at edge
// index 0. Node and edge order is deterministic (BFS discovery from the
// source; facts in id order).
struct QueryGraph {
  static constexpr int64_t kFakeRelation = -1;

  static constexpr FactId kNoFact = static_cast<FactId>(-1);

  struct Edge {
    uint32_t local_source;
    uint32_t local_target;
    int64_t relation;  // kFakeRelation for edge 0
    FactId fact;       // originating KB fact; kNoFact for the fake edge
  };

  EntityId source = 0;
  EntityId target = 0;
  uint32_t local_source = 0;
  uint32_t local_target = 0;
  std::vector<EntityId> nodes;                  // local index -> entity id
  std::vector<Edge> edges;                      // edge 0 is the fake fact
  std::vector<std::vector<TypeId>> node_types;  // aligned with nodes

  // Simple-path statistics gathered during extraction; parallel facts
  // between consecutive vertices count as distinct paths.
  uint64_t path_count = 0;
  double avg_path_length = 0.0;

  size_t num_nodes() const { return nodes.size(); }
  size_t num_edges() const { return edges.size(); }
};

// Throws InputError for s == t or max_len < 1, EmptyGraphError when no
// connecting path of length <= max_len exists. Traversal ignores edge
// direction (inverse relations are already folded onto canonical facts).
QueryGraph extract_subgraph(const KnowledgeBase& kb, EntityId source,
                            EntityId target, int max_len);

// Binary incidence matrices: S[i,j] = 1 iff edge i leaves node j,
// T[i,j] = 1 iff edge i enters node j. Row 0 is the fake fact.
std::pair<Tensor, Tensor> build_incidence(const QueryGraph& qg);

// Several query graphs packed as one block-diagonal graph so a batch runs
// through the model as a single forward pass.
struct BatchedGraph {
  Tensor S, T;                           // (total edges) x (total nodes)
  std::vector<int64_t> edge_relation;    // per edge row
  std::vector<std::vector<TypeId>> node_types;
  std::vector<size_t> fake_edge_rows;    // one per instance
  std::vector<size_t> node_offset;       // size batch+1
  std::vector<size_t> edge_offset;       // size batch+1

  size_t batch_size() const { return fake_edge_rows.size(); }
  size_t num_nodes() const { return node_offset.back(); }
  size_t num_edges() const { return edge_offset.back(); }
};

BatchedGraph batch_graphs(std::span<const QueryGraph> graphs);

}  // namespace kglink
