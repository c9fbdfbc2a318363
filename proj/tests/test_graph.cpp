#include <cmath>
#include <numeric>

#include "core/graph.hpp"
#include "doctest.h"

using namespace cadet;

namespace {

int undirected_degree(const Graph& g, int i) {
  int deg = 0;
  for (int j = 0; j < g.d; ++j)
    if (j != i && (g.edge(i, j) || g.edge(j, i))) ++deg;
  return deg;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("acyclicity and topological order") {
  Graph chain(3);
  chain.set_edge(0, 1);
  chain.set_edge(1, 2);
  CHECK(is_acyclic(chain));
  auto order = topo_order(chain);
  REQUIRE_EQ(order.size(), 3);
  std::vector<int> pos(3);
  for (int i = 0; i < 3; ++i) pos[static_cast<size_t>(order[static_cast<size_t>(i)])] = i;
  CHECK(pos[0] < pos[1]);
  CHECK(pos[1] < pos[2]);

  Graph cyc(2);
  cyc.set_edge(0, 1);
  cyc.set_edge(1, 0);
  CHECK_FALSE(is_acyclic(cyc));
  CHECK_THROWS_AS(topo_order(cyc), Error);

  Graph self(2);
  self.set_edge(1, 1);
  CHECK_FALSE(is_acyclic(self));
}

TEST_CASE("parents and edge_count") {
  Graph g(4);
  g.set_edge(0, 2);
  g.set_edge(1, 2);
  g.set_edge(2, 3);
  CHECK_EQ(g.edge_count(), 3);
  CHECK_EQ(g.parents(2), std::vector<int>({0, 1}));
  CHECK_EQ(g.parents(0), std::vector<int>());
}

TEST_CASE("every family yields DAGs of the requested size") {
  Rng rng(1234);
  GraphModelConfig cfg;
  for (GraphFamily fam :
       {GraphFamily::erdos_renyi, GraphFamily::scale_free, GraphFamily::watts_strogatz,
        GraphFamily::stochastic_block, GraphFamily::geometric, GraphFamily::subgraph_extraction}) {
    cfg.family = fam;
    for (int trial = 0; trial < 20; ++trial) {
      int d = 1 + static_cast<int>(rng.uniform_int(10));
      Graph g = sample_graph(cfg, d, rng);
      REQUIRE_EQ(g.d, d);
      CHECK(is_acyclic(g));
      for (int i = 0; i < d; ++i) CHECK_FALSE(g.edge(i, i));
    }
  }
}

TEST_CASE("erdos-renyi hits the expected edge count") {
  Rng rng(7);
  const int d = 20, trials = 400;
  const double e = 2.0;
  double total = 0;
  for (int t = 0; t < trials; ++t) {
    Graph g = sample_erdos_renyi(d, e, rng);
    total += g.edge_count();
  }
  // expected edges: p * d(d-1)/2 with p = 2e/(d-1) -> e*d = 40
  double mean = total / trials;
  CHECK(mean == doctest::Approx(e * d).epsilon(0.05));
}

TEST_CASE("erdos-renyi caps the edge probability at 1") {
  Rng rng(9);
  Graph g = sample_erdos_renyi(3, 50.0, rng);  // p would exceed 1
  CHECK_EQ(g.edge_count(), 3);                 // complete DAG on 3 nodes
  CHECK(is_acyclic(g));
}

TEST_CASE("scale-free produces hubs") {
  Rng rng(11);
  const int d = 30;
  int max_deg_sum = 0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    Graph g = sample_scale_free(d, 2.0, 1.0, rng);
    CHECK(is_acyclic(g));
    int best = 0;
    for (int i = 0; i < d; ++i) best = std::max(best, undirected_degree(g, i));
    max_deg_sum += best;
  }
  // preferential attachment concentrates degree: the hub degree is typically
  // far above the mean degree (~4)
  CHECK(max_deg_sum / static_cast<double>(trials) > 7.0);
}

TEST_CASE("watts-strogatz with no rewiring keeps the ring lattice skeleton") {
  Rng rng(13);
  Graph g = sample_watts_strogatz(10, 4, 0.0, rng);
  CHECK(is_acyclic(g));
  CHECK_EQ(g.edge_count(), 10 * 4 / 2);  // d*k/2 lattice edges survive orientation
  for (int i = 0; i < 10; ++i) CHECK_EQ(undirected_degree(g, i), 4);
}

TEST_CASE("watts-strogatz rewiring preserves the edge budget") {
  Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    Graph g = sample_watts_strogatz(12, 4, 0.5, rng);
    CHECK(is_acyclic(g));
    CHECK_EQ(g.edge_count(), 12 * 4 / 2);
  }
}

TEST_CASE("stochastic block calibrates the expected edge total") {
  Rng rng(19);
  const int d = 20, trials = 400;
  const double e = 1.5;
  double total = 0;
  for (int t = 0; t < trials; ++t) {
    Graph g = sample_stochastic_block(d, 2, e, 0.1, rng);
    CHECK(is_acyclic(g));
    total += g.edge_count();
  }
  // q is solved so that q*(intra + damping*inter) == e*d
  CHECK(total / trials == doctest::Approx(e * d).epsilon(0.05));
}

TEST_CASE("geometric graphs connect nearby points only sparsely at small radius") {
  Rng rng(23);
  double small_total = 0, large_total = 0;
  for (int t = 0; t < 50; ++t) {
    small_total += sample_geometric(15, 0.1, rng).edge_count();
    large_total += sample_geometric(15, 0.8, rng).edge_count();
  }
  CHECK(small_total < large_total);
}

TEST_CASE("subgraph extraction returns the requested node count") {
  Rng rng(29);
  Graph source = sample_scale_free(40, 2.0, 1.0, rng);
  ExtractResult r = extract_subgraph(source, 8, 20.0, rng);
  CHECK_EQ(r.g.d, 8);
  CHECK(is_acyclic(r.g));
  CHECK_FALSE(r.warning);
}

TEST_CASE("subgraph extraction validates its target size") {
  Rng rng(31);
  Graph source = sample_erdos_renyi(5, 1.0, rng);
  CHECK_THROWS_AS(extract_subgraph(source, 9, 20.0, rng), Error);
  CHECK_THROWS_AS(extract_subgraph(source, 3, 0.0, rng), Error);
}

TEST_CASE("subgraph extraction warns when growth stalls on a disconnected source") {
  // two 3-cliques with no bridge: no restart can grow past 3 nodes
  Graph source(6);
  for (int base : {0, 3}) {
    source.set_edge(base, base + 1);
    source.set_edge(base + 1, base + 2);
    source.set_edge(base, base + 2);
  }
  Rng rng(37);
  ExtractResult r = extract_subgraph(source, 5, 20.0, rng);
  CHECK(r.warning);
  CHECK_EQ(r.g.d, 3);  // best attempt is one full component
  CHECK_EQ(r.g.edge_count(), 3);
}

TEST_CASE("partition modularity matches the textbook formula on a known cut") {
  // two triangles joined by one edge: cutting between them is strongly modular
  Graph g(6);
  g.set_edge(0, 1);
  g.set_edge(1, 2);
  g.set_edge(0, 2);
  g.set_edge(3, 4);
  g.set_edge(4, 5);
  g.set_edge(3, 5);
  g.set_edge(2, 3);
  std::vector<uint8_t> in_set = {1, 1, 1, 0, 0, 0};
  // Q = sum_c (e_c/m - (deg_c/2m)^2); m=7, e_in={3,3}, deg={7,7}
  double want = (3.0 / 7 - 0.25) + (3.0 / 7 - 0.25);
  CHECK(partition_modularity(g, in_set) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("sampling is deterministic given the seed") {
  GraphModelConfig cfg;
  cfg.family = GraphFamily::scale_free;
  Rng r1(77), r2(77);
  for (int t = 0; t < 5; ++t) {
    Graph a = sample_graph(cfg, 9, r1);
    Graph b = sample_graph(cfg, 9, r2);
    CHECK(a == b);
  }
}

TEST_CASE("d=1 edge cases") {
  Rng rng(83);
  GraphModelConfig cfg;
  for (GraphFamily fam : {GraphFamily::erdos_renyi, GraphFamily::scale_free,
                          GraphFamily::watts_strogatz, GraphFamily::geometric}) {
    cfg.family = fam;
    Graph g = sample_graph(cfg, 1, rng);
    CHECK_EQ(g.d, 1);
    CHECK_EQ(g.edge_count(), 0);
  }
}

TEST_CASE("invalid arguments are rejected") {
  Rng rng(89);
  CHECK_THROWS_AS(sample_erdos_renyi(0, 1.0, rng), Error);
  CHECK_THROWS_AS(sample_erdos_renyi(5, -1.0, rng), Error);
  CHECK_THROWS_AS(sample_watts_strogatz(5, -2, 0.1, rng), Error);
  CHECK_THROWS_AS(sample_watts_strogatz(5, 2, 1.5, rng), Error);
  GraphModelConfig cfg;
  CHECK_THROWS_AS(sample_graph(cfg, -2, rng), Error);
  GraphModelConfig sub;
  sub.family = GraphFamily::subgraph_extraction;
  sub.source_d = 4;
  CHECK_THROWS_AS(sample_graph(sub, 8, rng), Error);  // source smaller than target
}

}  // TEST_SUITE
