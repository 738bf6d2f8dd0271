#include "kglink/query_graph.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "kglink/errors.hpp"

namespace kglink {

namespace {

constexpr int kUnreached = std::numeric_limits<int>::max();

// Undirected BFS distances from `start`, capped at max_len hops.
std::vector<int> bfs_distances(const KnowledgeBase& kb, EntityId start, int max_len) {
  std::vector<int> dist(kb.num_entities(), kUnreached);
  dist[start] = 0;
  std::deque<EntityId> frontier{start};
  while (!frontier.empty()) {
    EntityId u = frontier.front();
    frontier.pop_front();
    if (dist[u] == max_len) continue;
    auto visit = [&](EntityId v) {
      if (dist[v] == kUnreached) {
        dist[v] = dist[u] + 1;
        frontier.push_back(v);
      }
    };
    for (FactId f : kb.facts_from(u)) visit(kb.fact(f).target);
    for (FactId f : kb.facts_into(u)) visit(kb.fact(f).source);
  }
  return dist;
}

uint64_t pair_key(EntityId a, EntityId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<uint64_t>(a) << 32) | b;
}

}  // namespace

QueryGraph extract_subgraph(const KnowledgeBase& kb, EntityId source,
                            EntityId target, int max_len) {
  if (source >= kb.num_entities() || target >= kb.num_entities()) {
    throw InputError("extract_subgraph: entity id out of range");
  }
  if (source == target) {
    throw InputError("extract_subgraph: source and target must differ");
  }
  if (max_len < 1) {
    throw InputError("extract_subgraph: path length bound must be >= 1");
  }

  const auto dist_s = bfs_distances(kb, source, max_len);
  const auto dist_t = bfs_distances(kb, target, max_len);
  if (dist_s[target] > max_len) {
    throw EmptyGraphError("no path of length <= " + std::to_string(max_len) +
                          " between " + kb.entities().name(source) + " and " +
                          kb.entities().name(target));
  }

  // Candidate filter: nodes that can sit on some walk within the bound.
  // The path enumeration below then prunes anything not on a simple path.
  auto candidate = [&](EntityId v) {
    return dist_s[v] != kUnreached && dist_t[v] != kUnreached &&
           dist_s[v] + dist_t[v] <= max_len;
  };

  // Adjacency over candidates with parallel facts folded per node pair.
  std::unordered_map<EntityId, std::vector<EntityId>> adj;
  std::unordered_map<uint64_t, std::vector<FactId>> pair_facts;
  for (const Fact& f : kb.facts()) {
    if (f.source == f.target) continue;  // self-loops sit on no simple path
    if (!candidate(f.source) || !candidate(f.target)) continue;
    auto& facts = pair_facts[pair_key(f.source, f.target)];
    if (facts.empty()) {
      adj[f.source].push_back(f.target);
      adj[f.target].push_back(f.source);
    }
    facts.push_back(f.id);
  }

  // Enumerate simple vertex paths source -> target of length <= max_len,
  // marking every node and node pair seen on at least one of them. Parallel
  // facts multiply the path count.
  std::unordered_set<EntityId> marked_nodes;
  std::unordered_set<uint64_t> marked_pairs;
  uint64_t path_count = 0;
  uint64_t length_sum = 0;

  std::vector<EntityId> path{source};
  std::unordered_set<EntityId> on_path{source};

  static const std::vector<EntityId> no_neighbors;
  auto neighbors = [&](EntityId v) -> const std::vector<EntityId>& {
    auto it = adj.find(v);
    return it == adj.end() ? no_neighbors : it->second;
  };

  auto mult = [&](EntityId a, EntityId b) -> uint64_t {
    return pair_facts.at(pair_key(a, b)).size();
  };

  auto record_path = [&]() {
    uint64_t combinations = 1;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      combinations *= mult(path[i], path[i + 1]);
    }
    path_count += combinations;
    length_sum += combinations * (path.size() - 1);
    for (EntityId v : path) marked_nodes.insert(v);
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      marked_pairs.insert(pair_key(path[i], path[i + 1]));
    }
  };

  auto dfs = [&](auto&& self, EntityId v) -> void {
    const int len = static_cast<int>(path.size()) - 1;
    for (EntityId w : neighbors(v)) {
      if (w == target) {
        path.push_back(w);
        record_path();
        path.pop_back();
        continue;
      }
      if (on_path.count(w)) continue;
      if (len + 1 + dist_t[w] > max_len) continue;
      path.push_back(w);
      on_path.insert(w);
      self(self, w);
      on_path.erase(w);
      path.pop_back();
    }
  };
  dfs(dfs, source);

  if (path_count == 0) {
    throw EmptyGraphError("no simple path of length <= " +
                          std::to_string(max_len) + " between " +
                          kb.entities().name(source) + " and " +
                          kb.entities().name(target));
  }

  // Deterministic node order: BFS discovery from the source over retained
  // pairs, expanding neighbours in first-connecting-fact order.
  QueryGraph qg;
  qg.source = source;
  qg.target = target;
  qg.path_count = path_count;
  qg.avg_path_length =
      static_cast<double>(length_sum) / static_cast<double>(path_count);

  std::unordered_map<EntityId, uint32_t> local;
  std::deque<EntityId> frontier{source};
  local.emplace(source, 0);
  qg.nodes.push_back(source);
  while (!frontier.empty()) {
    EntityId u = frontier.front();
    frontier.pop_front();
    for (EntityId v : neighbors(u)) {
      if (!marked_nodes.count(v) || !marked_pairs.count(pair_key(u, v))) continue;
      if (local.count(v)) continue;
      local.emplace(v, static_cast<uint32_t>(qg.nodes.size()));
      qg.nodes.push_back(v);
      frontier.push_back(v);
    }
  }
  qg.local_source = local.at(source);
  qg.local_target = local.at(target);

  std::vector<FactId> retained;
  for (uint64_t key : marked_pairs) {
    const auto& facts = pair_facts.at(key);
    retained.insert(retained.end(), facts.begin(), facts.end());
  }
  std::sort(retained.begin(), retained.end());

  qg.edges.push_back(QueryGraph::Edge{qg.local_source, qg.local_target,
                                      QueryGraph::kFakeRelation,
                                      QueryGraph::kNoFact});
  for (FactId id : retained) {
    const Fact& f = kb.fact(id);
    qg.edges.push_back(QueryGraph::Edge{local.at(f.source), local.at(f.target),
                                        static_cast<int64_t>(f.relation), id});
  }

  qg.node_types.reserve(qg.nodes.size());
  for (EntityId e : qg.nodes) qg.node_types.push_back(kb.entity_types(e));
  return qg;
}

std::pair<Tensor, Tensor> build_incidence(const QueryGraph& qg) {
  Tensor s(qg.num_edges(), qg.num_nodes());
  Tensor t(qg.num_edges(), qg.num_nodes());
  for (size_t i = 0; i < qg.edges.size(); ++i) {
    s.at(i, qg.edges[i].local_source) = 1.0;
    t.at(i, qg.edges[i].local_target) = 1.0;
  }
  return {std::move(s), std::move(t)};
}

BatchedGraph batch_graphs(std::span<const QueryGraph> graphs) {
  if (graphs.empty()) {
    throw InputError("batch_graphs: empty batch");
  }
  BatchedGraph bg;
  bg.node_offset.push_back(0);
  bg.edge_offset.push_back(0);
  size_t total_nodes = 0, total_edges = 0;
  for (const QueryGraph& g : graphs) {
    total_nodes += g.num_nodes();
    total_edges += g.num_edges();
    bg.node_offset.push_back(total_nodes);
    bg.edge_offset.push_back(total_edges);
  }
  bg.S = Tensor(total_edges, total_nodes);
  bg.T = Tensor(total_edges, total_nodes);
  bg.edge_relation.reserve(total_edges);
  bg.node_types.reserve(total_nodes);
  for (size_t k = 0; k < graphs.size(); ++k) {
    const QueryGraph& g = graphs[k];
    const size_t no = bg.node_offset[k];
    const size_t eo = bg.edge_offset[k];
    bg.fake_edge_rows.push_back(eo);
    for (size_t i = 0; i < g.edges.size(); ++i) {
      bg.S.at(eo + i, no + g.edges[i].local_source) = 1.0;
      bg.T.at(eo + i, no + g.edges[i].local_target) = 1.0;
      bg.edge_relation.push_back(g.edges[i].relation);
    }
    for (const auto& types : g.node_types) bg.node_types.push_back(types);
  }
  return bg;
}

}  // namespace kglink
