#include <doctest.h>

#include <set>

#include "kglink/errors.hpp"
#include "kglink/kb.hpp"
#include "kglink/query_graph.hpp"
#include "kglink/rng.hpp"
#include "oracles.hpp"

using namespace kglink;

namespace {

std::set<EntityId> node_set(const QueryGraph& qg) {
  return {qg.nodes.begin(), qg.nodes.end()};
}

EntityId id_of(const KnowledgeBase& kb, const std::string& name) {
  const uint32_t* id = kb.entities().lookup(name);
  REQUIRE(id != nullptr);
  return *id;
}

}  // namespace

TEST_CASE("chain extraction keeps the unique path") {
  KnowledgeBase kb;
  kb.add_fact("a", "r", "b");
  kb.add_fact("b", "r", "c");
  kb.add_fact("x", "r", "y");  // unrelated component

  QueryGraph qg = extract_subgraph(kb, id_of(kb, "a"), id_of(kb, "c"), 3);
  CHECK(qg.num_nodes() == 3);
  CHECK(qg.num_edges() == 3);  // fake + 2 real
  CHECK(qg.edges[0].relation == QueryGraph::kFakeRelation);
  CHECK(qg.path_count == 1);
  CHECK(qg.avg_path_length == doctest::Approx(2.0));
}

TEST_CASE("diamond keeps both parallel paths") {
  KnowledgeBase kb;
  kb.add_fact("a", "r", "b");
  kb.add_fact("b", "r", "d");
  kb.add_fact("a", "r", "c");
  kb.add_fact("c", "r", "d");

  QueryGraph qg = extract_subgraph(kb, id_of(kb, "a"), id_of(kb, "d"), 2);
  CHECK(qg.num_nodes() == 4);
  CHECK(qg.num_edges() == 5);  // fake + 4 real
  CHECK(qg.path_count == 2);
}

TEST_CASE("inverse-folded facts are traversed in both directions") {
  KnowledgeBase kb;
  kb.add_fact("LHR", "locatedIn", "England");
  kb.add_fact("England", "_capitalOf", "London");  // stored (London, capitalOf, England)

  QueryGraph qg = extract_subgraph(kb, id_of(kb, "LHR"), id_of(kb, "London"), 2);
  CHECK(qg.num_nodes() == 3);
  CHECK(qg.num_edges() == 3);
}

TEST_CASE("no path within the bound raises EmptyGraphError") {
  KnowledgeBase kb;
  kb.add_fact("a", "r", "b");
  kb.add_fact("b", "r", "c");
  kb.add_fact("c", "r", "d");
  kb.add_fact("x", "r", "y");

  CHECK_THROWS_AS(extract_subgraph(kb, id_of(kb, "a"), id_of(kb, "d"), 2),
                  EmptyGraphError);
  CHECK_THROWS_AS(extract_subgraph(kb, id_of(kb, "a"), id_of(kb, "x"), 6),
                  EmptyGraphError);
}

TEST_CASE("degenerate queries are rejected") {
  KnowledgeBase kb;
  kb.add_fact("a", "r", "b");
  CHECK_THROWS_AS(extract_subgraph(kb, 0, 0, 3), InputError);
  CHECK_THROWS_AS(extract_subgraph(kb, 0, 1, 0), InputError);
}

TEST_CASE("incidence matrices mark source and target slots") {
  KnowledgeBase kb;
  kb.add_fact("u", "r", "v");
  QueryGraph qg = extract_subgraph(kb, id_of(kb, "u"), id_of(kb, "v"), 1);
  auto [s, t] = build_incidence(qg);
  // nodes [u, v]; edges [fake u->v, real u->v]
  CHECK(s.at(0, 0) == 1.0);
  CHECK(s.at(0, 1) == 0.0);
  CHECK(s.at(1, 0) == 1.0);
  CHECK(t.at(0, 1) == 1.0);
  CHECK(t.at(1, 1) == 1.0);
  CHECK(t.at(0, 0) == 0.0);
}

TEST_CASE("incidence rows sum to exactly one") {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    KnowledgeBase kb = oracle::random_kb(rng, 10);
    EntityId s = 0, t = 1;
    QueryGraph qg;
    try {
      qg = extract_subgraph(kb, s, t, 4);
    } catch (const EmptyGraphError&) {
      continue;
    }
    auto [S, T] = build_incidence(qg);
    for (size_t i = 0; i < qg.num_edges(); ++i) {
      double srow = 0.0, trow = 0.0;
      for (size_t j = 0; j < qg.num_nodes(); ++j) {
        CHECK((S.at(i, j) == 0.0 || S.at(i, j) == 1.0));
        CHECK((T.at(i, j) == 0.0 || T.at(i, j) == 1.0));
        srow += S.at(i, j);
        trow += T.at(i, j);
      }
      CHECK(srow == 1.0);
      CHECK(trow == 1.0);
    }
  }
}

TEST_CASE("incidence column sums equal node degrees") {
  KnowledgeBase kb;
  kb.add_fact("a", "r", "b");
  kb.add_fact("a", "r", "c");
  kb.add_fact("b", "r", "d");
  kb.add_fact("c", "r", "d");
  QueryGraph qg = extract_subgraph(kb, id_of(kb, "a"), id_of(kb, "d"), 2);
  auto [S, T] = build_incidence(qg);

  for (size_t j = 0; j < qg.num_nodes(); ++j) {
    size_t out_degree = 0, in_degree = 0;
    for (const auto& e : qg.edges) {
      if (e.local_source == j) ++out_degree;
      if (e.local_target == j) ++in_degree;
    }
    double s_col = 0.0, t_col = 0.0;
    for (size_t i = 0; i < qg.num_edges(); ++i) {
      s_col += S.at(i, j);
      t_col += T.at(i, j);
    }
    CHECK(s_col == static_cast<double>(out_degree));
    CHECK(t_col == static_cast<double>(in_degree));
  }
}

TEST_CASE("extraction equals brute-force path enumeration on 200 random KBs") {
  Rng rng(2024);
  size_t nonempty = 0;
  for (int trial = 0; trial < 200; ++trial) {
    KnowledgeBase kb = oracle::random_kb(rng, 12);
    const EntityId s = 0;
    const EntityId t = 1;
    const int max_len = 1 + static_cast<int>(rng.below(5));

    oracle::PathSets expected = oracle::enumerate_simple_paths(kb, s, t, max_len);
    if (expected.path_count == 0) {
      CHECK_THROWS_AS(extract_subgraph(kb, s, t, max_len), EmptyGraphError);
      continue;
    }
    ++nonempty;
    QueryGraph qg = extract_subgraph(kb, s, t, max_len);
    CHECK(node_set(qg) == expected.nodes);

    std::set<FactId> got_edges;
    for (size_t i = 1; i < qg.edges.size(); ++i) {
      got_edges.insert(qg.edges[i].fact);
    }
    CHECK(got_edges == expected.edges);
    CHECK(qg.path_count == expected.path_count);
    CHECK(qg.avg_path_length == doctest::Approx(expected.avg_length()));
  }
  CHECK(nonempty > 50);  // the fixture actually exercises extraction
}

TEST_CASE("extraction is minimal: every edge sits on a qualifying path") {
  Rng rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    KnowledgeBase kb = oracle::random_kb(rng, 8);
    QueryGraph qg;
    try {
      qg = extract_subgraph(kb, 0, 1, 3);
    } catch (const EmptyGraphError&) {
      continue;
    }
    oracle::PathSets full = oracle::enumerate_simple_paths(kb, 0, 1, 3);
    // dropping any real edge must lose at least one simple path
    for (FactId edge : full.edges) {
      KnowledgeBase pruned;
      for (const Fact& f : kb.facts()) {
        if (f.id == edge) continue;
        pruned.add_fact(kb.entities().name(f.source),
                        kb.relations().name(f.relation),
                        kb.entities().name(f.target));
      }
      pruned.intern_entity(kb.entities().name(0));
      pruned.intern_entity(kb.entities().name(1));
      oracle::PathSets reduced = oracle::enumerate_simple_paths(
          pruned, id_of(pruned, kb.entities().name(0)),
          id_of(pruned, kb.entities().name(1)), 3);
      CHECK(reduced.path_count < full.path_count);
    }
  }
}

TEST_CASE("extraction is symmetric in the endpoints") {
  Rng rng(88);
  for (int trial = 0; trial < 40; ++trial) {
    KnowledgeBase kb = oracle::random_kb(rng, 10);
    QueryGraph forward, backward;
    bool fwd_empty = false, bwd_empty = false;
    try {
      forward = extract_subgraph(kb, 0, 1, 4);
    } catch (const EmptyGraphError&) {
      fwd_empty = true;
    }
    try {
      backward = extract_subgraph(kb, 1, 0, 4);
    } catch (const EmptyGraphError&) {
      bwd_empty = true;
    }
    CHECK(fwd_empty == bwd_empty);
    if (!fwd_empty) {
      CHECK(node_set(forward) == node_set(backward));
    }
  }
}

TEST_CASE("batch of one matches the single graph") {
  KnowledgeBase kb;
  kb.add_fact("a", "r", "b");
  kb.add_fact("b", "r", "c");
  QueryGraph qg = extract_subgraph(kb, id_of(kb, "a"), id_of(kb, "c"), 2);
  BatchedGraph bg = batch_graphs(std::span(&qg, 1));
  auto [S, T] = build_incidence(qg);
  CHECK(bg.S == S);
  CHECK(bg.T == T);
  CHECK(bg.fake_edge_rows == std::vector<size_t>{0});
  CHECK(bg.batch_size() == 1);
}

TEST_CASE("batched incidence is block diagonal") {
  KnowledgeBase kb;
  kb.add_fact("a", "r", "b");
  kb.add_fact("b", "r", "c");
  kb.add_fact("p", "r", "q");
  QueryGraph g1 = extract_subgraph(kb, id_of(kb, "a"), id_of(kb, "c"), 2);
  QueryGraph g2 = extract_subgraph(kb, id_of(kb, "p"), id_of(kb, "q"), 2);
  std::vector<QueryGraph> graphs{g1, g2};
  BatchedGraph bg = batch_graphs(graphs);

  CHECK(bg.S.rows() == g1.num_edges() + g2.num_edges());
  CHECK(bg.S.cols() == g1.num_nodes() + g2.num_nodes());
  CHECK(bg.fake_edge_rows == std::vector<size_t>{0, g1.num_edges()});

  // off-diagonal blocks are zero
  for (size_t i = 0; i < g1.num_edges(); ++i) {
    for (size_t j = g1.num_nodes(); j < bg.S.cols(); ++j) {
      CHECK(bg.S.at(i, j) == 0.0);
      CHECK(bg.T.at(i, j) == 0.0);
    }
  }
  for (size_t i = g1.num_edges(); i < bg.S.rows(); ++i) {
    for (size_t j = 0; j < g1.num_nodes(); ++j) {
      CHECK(bg.S.at(i, j) == 0.0);
      CHECK(bg.T.at(i, j) == 0.0);
    }
  }
}

TEST_CASE("empty batch is rejected") {
  CHECK_THROWS_AS(batch_graphs(std::span<const QueryGraph>{}), InputError);
}
