#include <cmath>

#include "core/metrics.hpp"
#include "doctest.h"

using namespace cadet;

namespace {

Graph chain3() {
  Graph g(3);
  g.set_edge(0, 1);
  g.set_edge(1, 2);
  return g;
}

Tensor beliefs_of(const Graph& g, double on = 0.9, double off = 0.1) {
  Tensor t({g.d, g.d}, off);
  for (int i = 0; i < g.d; ++i) {
    t[static_cast<int64_t>(i) * g.d + i] = 0.0;
    for (int j = 0; j < g.d; ++j)
      if (g.edge(i, j)) t[static_cast<int64_t>(i) * g.d + j] = on;
  }
  return t;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("threshold is strict and skips the diagonal") {
  Tensor t = Tensor::from({2, 2}, {0.9, 0.5, 0.51, 0.9});  // hot diagonal
  Graph g = threshold(t, 0.5);
  CHECK_FALSE(g.edge(0, 0));  // diagonal ignored even above tau
  CHECK_FALSE(g.edge(0, 1));  // exactly tau is not an edge
  CHECK(g.edge(1, 0));
  CHECK_EQ(g.edge_count(), 1);
}

TEST_CASE("an untrained sparse prior yields an empty graph at tau 0.5") {
  double sparse = 1.0 / (1.0 + std::exp(3.0));  // logistic(-3) ~ 0.047
  Tensor t({4, 4}, sparse);
  CHECK_EQ(threshold(t, 0.5).edge_count(), 0);
}

TEST_CASE("shd counts a reversal once") {
  Graph a(2), b(2);
  a.set_edge(0, 1);
  b.set_edge(1, 0);
  CHECK_EQ(shd(a, b), 1);
  CHECK_EQ(shd(a, a), 0);
  Graph c(2);  // missing edge
  CHECK_EQ(shd(a, c), 1);
  Graph t3 = chain3();
  Graph p3(3);
  p3.set_edge(1, 0);  // reversal of 0->1
  p3.set_edge(0, 2);  // extra edge
  // pairs: {0,1} reversed = 1; {1,2} missing = 1; {0,2} extra = 1
  CHECK_EQ(shd(t3, p3), 3);
}

TEST_CASE("descendants and ancestors on a chain") {
  Graph g = chain3();
  auto de0 = descendants(g, 0);
  CHECK_EQ(de0, std::vector<uint8_t>({0, 1, 1}));  // excludes the node itself
  auto an2 = ancestors(g, 2);
  CHECK_EQ(an2, std::vector<uint8_t>({1, 1, 0}));
  CHECK_EQ(descendants(g, 2), std::vector<uint8_t>({0, 0, 0}));
}

TEST_CASE("d-separation handles chains, forks, and colliders") {
  Graph chain = chain3();
  std::vector<uint8_t> none(3, 0), mid(3, 0);
  mid[1] = 1;
  CHECK_FALSE(d_separated(chain, 0, 2, none));
  CHECK(d_separated(chain, 0, 2, mid));

  Graph fork(3);  // 1 <- 0 -> 2
  fork.set_edge(0, 1);
  fork.set_edge(0, 2);
  std::vector<uint8_t> root(3, 0);
  root[0] = 1;
  CHECK_FALSE(d_separated(fork, 1, 2, none));
  CHECK(d_separated(fork, 1, 2, root));

  Graph coll(4);  // 0 -> 2 <- 1, 2 -> 3
  coll.set_edge(0, 2);
  coll.set_edge(1, 2);
  coll.set_edge(2, 3);
  std::vector<uint8_t> empty(4, 0), z2(4, 0), z3(4, 0);
  z2[2] = 1;
  z3[3] = 1;
  CHECK(d_separated(coll, 0, 1, empty));    // blocked collider
  CHECK_FALSE(d_separated(coll, 0, 1, z2)); // conditioning opens it
  CHECK_FALSE(d_separated(coll, 0, 1, z3)); // conditioning on a descendant opens it
}

TEST_CASE("sid is zero for the true graph and for order-consistent supergraphs") {
  Graph t = chain3();
  CHECK_EQ(sid(t, t), 0);
  Graph super = chain3();
  super.set_edge(0, 2);  // complete DAG in the true topological order
  CHECK_EQ(sid(t, super), 0);
}

TEST_CASE("sid hand values for empty and reversed predictions") {
  Graph t = chain3();
  Graph empty(3);
  // all three upstream/cross pairs fail without adjustment
  CHECK_EQ(sid(t, empty), 3);

  Graph t2(2), rev(2);
  t2.set_edge(0, 1);
  rev.set_edge(1, 0);
  CHECK_EQ(sid(t2, rev), 2);
  CHECK_EQ(sid(t2, Graph(2)), 1);  // only the anti-causal pair fails
}

TEST_CASE("sid rejects cyclic inputs") {
  Graph cyc(2);
  cyc.set_edge(0, 1);
  cyc.set_edge(1, 0);
  CHECK_THROWS_AS(sid(chain3(), cyc), Error);
}

TEST_CASE("drop_back_edges keeps an acyclic subset") {
  Graph cyc(3);
  cyc.set_edge(0, 1);
  cyc.set_edge(1, 2);
  cyc.set_edge(2, 0);
  Graph dag = drop_back_edges(cyc);
  CHECK(is_acyclic(dag));
  CHECK_EQ(dag.edge_count(), 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (dag.edge(i, j)) CHECK(cyc.edge(i, j));
  Graph already = chain3();
  CHECK(drop_back_edges(already) == already);
}

TEST_CASE("auroc uses the tie-aware rank statistic") {
  std::vector<double> scores = {0.9, 0.5, 0.5, 0.1};
  std::vector<int> labels = {1, 1, 0, 0};
  RankAreas ra = rank_areas(scores, labels);
  REQUIRE(ra.auroc.has_value());
  CHECK(*ra.auroc == doctest::Approx(0.875).epsilon(1e-12));  // (2 wins + 1 loss-tie/2 + ... )/4
  REQUIRE(ra.auprc.has_value());
  CHECK(*ra.auprc == doctest::Approx(0.5 + (2.0 / 3.0) * 0.5).epsilon(1e-12));
}

TEST_CASE("perfect and inverted rankings bracket auroc") {
  std::vector<double> s = {0.9, 0.8, 0.2, 0.1};
  RankAreas best = rank_areas(s, {1, 1, 0, 0});
  RankAreas worst = rank_areas(s, {0, 0, 1, 1});
  CHECK_EQ(*best.auroc, 1.0);
  CHECK_EQ(*best.auprc, 1.0);
  CHECK_EQ(*worst.auroc, 0.0);
  // label flip mirrors the rank statistic around one half
  RankAreas mid = rank_areas(s, {1, 0, 1, 0});
  CHECK(*mid.auroc == doctest::Approx(1.0 - rank_areas(s, {0, 1, 0, 1}).auroc.value()));
}

TEST_CASE("constant scores give chance-level auroc") {
  RankAreas ra = rank_areas({0.3, 0.3, 0.3, 0.3}, {1, 0, 1, 0});
  CHECK(*ra.auroc == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(*ra.auprc == doctest::Approx(0.5).epsilon(1e-12));  // AP equals base rate
}

TEST_CASE("degenerate label sets leave areas absent") {
  RankAreas all_pos = rank_areas({0.2, 0.8}, {1, 1});
  CHECK_FALSE(all_pos.auroc.has_value());
  REQUIRE(all_pos.auprc.has_value());
  CHECK_EQ(*all_pos.auprc, 1.0);
  RankAreas all_neg = rank_areas({0.2, 0.8}, {0, 0});
  CHECK_FALSE(all_neg.auroc.has_value());
  CHECK_FALSE(all_neg.auprc.has_value());
  CHECK_THROWS_AS(rank_areas({0.2}, {1, 0}), Error);
}

TEST_CASE("evaluate assembles the full report") {
  Graph t = chain3();
  Tensor beliefs = beliefs_of(t);
  EvalReport r = evaluate(beliefs, t, 0.5);
  CHECK_EQ(r.shd, 0);
  CHECK_EQ(r.sid, 0);
  CHECK_EQ(r.precision, 1.0);
  CHECK_EQ(r.recall, 1.0);
  CHECK_EQ(r.f1, 1.0);
  CHECK_EQ(r.edges_predicted, 2);
  CHECK(r.acyclic);
  CHECK_EQ(*r.auroc, 1.0);
  CHECK_EQ(*r.auprc, 1.0);
}

TEST_CASE("evaluate flags cyclic predictions and still scores them") {
  Graph t = chain3();
  Tensor beliefs({3, 3}, 0.1);
  beliefs[0 * 3 + 1] = 0.9;
  beliefs[1 * 3 + 0] = 0.9;  // 2-cycle
  EvalReport r = evaluate(beliefs, t, 0.5);
  CHECK_FALSE(r.acyclic);
  CHECK_EQ(r.edges_predicted, 2);
  CHECK(r.sid >= 0);  // computed on the pruned DAG rather than raising
}

TEST_CASE("empty prediction conventions") {
  Graph t = chain3();
  Tensor beliefs({3, 3}, 0.0);
  EvalReport r = evaluate(beliefs, t, 0.5);
  CHECK_EQ(r.precision, 0.0);  // 0/0 reported as 0
  CHECK_EQ(r.recall, 0.0);
  CHECK_EQ(r.f1, 0.0);
  CHECK_EQ(r.shd, 2);
  // empty true graph: recall convention and absent rank areas
  Graph none(3);
  EvalReport r2 = evaluate(beliefs, none, 0.5);
  CHECK_EQ(r2.recall, 0.0);
  CHECK_EQ(r2.shd, 0);
  CHECK_EQ(r2.sid, 0);
  CHECK_FALSE(r2.auprc.has_value());  // no positive labels
}

TEST_CASE("evaluate validates the belief matrix shape") {
  CHECK_THROWS_AS(evaluate(Tensor({2, 3}), chain3(), 0.5), Error);
  CHECK_THROWS_AS(evaluate(Tensor({3, 3}), Graph(4), 0.5), Error);
}

TEST_CASE("aggregate_reports averages and tracks cyclic fraction") {
  Graph t = chain3();
  EvalReport a = evaluate(beliefs_of(t), t, 0.5);
  Tensor cyc({3, 3}, 0.1);
  cyc[0 * 3 + 1] = 0.9;
  cyc[1 * 3 + 0] = 0.9;
  EvalReport b = evaluate(cyc, t, 0.5);
  json j = aggregate_reports({a, b});
  CHECK_EQ(j.at("count").get<int>(), 2);
  CHECK_EQ(j.at("cyclic_fraction").get<double>(), 0.5);
  CHECK(j.at("shd").at("mean").get<double>() > 0.0);
  CHECK(j.at("auroc").at("count").get<int>() == 2);
  json empty = aggregate_reports({});
  CHECK(empty.at("cyclic_fraction").is_null());
}

}  // TEST_SUITE
