#include <cmath>

#include "core/scm.hpp"
#include "doctest.h"

using namespace cadet;

TEST_SUITE("scm") {

TEST_CASE("linear mechanism evaluates an affine form over its parents") {
  Mechanism m;
  m.kind = Mechanism::Kind::linear;
  m.parents = {0, 2};
  m.weights = {2.0, -1.5};
  m.bias = 0.25;
  double row[3] = {1.0, 99.0, 4.0};  // parent 1 is ignored
  CHECK(eval_mechanism(m, row) == doctest::Approx(0.25 + 2.0 * 1.0 - 1.5 * 4.0));
}

TEST_CASE("rff evaluation matches the closed form") {
  Mechanism m;
  m.kind = Mechanism::Kind::rff;
  m.parents = {0, 1};
  m.m = 2;
  m.omega = {0.5, -0.25, 1.0, 2.0};  // two features over two parents
  m.phases = {0.3, -0.7};
  m.c = 1.7;
  m.bias = 0.1;
  std::vector<double> x = {2.0, -1.0};
  double want = 0.1 + 1.7 * std::sqrt(2.0 / 2.0) *
                          (std::cos(0.5 * 2.0 - 0.25 * -1.0 + 0.3) +
                           std::cos(1.0 * 2.0 + 2.0 * -1.0 - 0.7));
  CHECK(eval_rff(m, x) == doctest::Approx(want).epsilon(1e-12));
  CHECK_THROWS_AS(eval_rff(m, {1.0}), Error);
}

TEST_CASE("rff features approximate the squared-exponential kernel") {
  // E[f(x) f(x')] over feature draws equals c^2 exp(-|x-x'|^2 / (2 ell^2))
  Rng rng(101);
  const double ell = 1.3, c = 1.0;
  const double x = 0.4, xp = -0.8;
  const int draws = 4000, m = 8;
  double acc = 0.0;
  for (int t = 0; t < draws; ++t) {
    Mechanism mech;
    mech.kind = Mechanism::Kind::rff;
    mech.parents = {0};
    mech.m = m;
    mech.c = c;
    mech.bias = 0.0;
    mech.omega.resize(m);
    mech.phases.resize(m);
    for (double& w : mech.omega) w = rng.normal() / ell;
    for (double& p : mech.phases) p = rng.uniform(0.0, 2.0 * M_PI);
    acc += eval_rff(mech, {x}) * eval_rff(mech, {xp});
  }
  double got = acc / draws;
  double want = c * c * std::exp(-(x - xp) * (x - xp) / (2 * ell * ell));
  CHECK(got == doctest::Approx(want).epsilon(0.08));
}

TEST_CASE("sampled rff mechanisms respect the configured ranges") {
  Rng rng(103);
  MechanismRanges r;
  r.rff_features = 17;
  r.length_scale_low = 2.0;
  r.length_scale_high = 2.5;
  r.output_scale_low = 3.0;
  r.output_scale_high = 3.5;
  for (int t = 0; t < 20; ++t) {
    Mechanism m = sample_rff_mechanism({0, 1, 2}, r, rng);
    CHECK_EQ(m.m, 17);
    CHECK_EQ(m.omega.size(), 17 * 3);
    CHECK_EQ(m.phases.size(), 17);
    CHECK(m.ell >= 2.0);
    CHECK(m.ell < 2.5);
    CHECK(m.c >= 3.0);
    CHECK(m.c < 3.5);
    for (double ph : m.phases) {
      CHECK(ph >= 0.0);
      CHECK(ph < 2.0 * M_PI);
    }
  }
}

TEST_CASE("linear mechanism weights have magnitude in range and random sign") {
  Rng rng(107);
  DomainConfig dom = DomainConfig::defaults(DomainKind::linear);
  Graph g(6);
  for (int j = 1; j < 6; ++j) g.set_edge(0, j);
  int neg = 0, pos = 0;
  for (int t = 0; t < 40; ++t) {
    Mechanisms m = sample_mechanisms(g, dom, rng);
    for (int j = 1; j < 6; ++j) {
      REQUIRE_EQ(m.f[static_cast<size_t>(j)].weights.size(), 1);
      double w = m.f[static_cast<size_t>(j)].weights[0];
      CHECK(std::abs(w) >= 0.5);
      CHECK(std::abs(w) < 2.0);
      (w < 0 ? neg : pos)++;
    }
    CHECK(m.noise[0].sigma >= 0.5);
    CHECK(m.noise[0].sigma < 1.0);
  }
  CHECK(neg > 40);  // both signs occur
  CHECK(pos > 40);
}

TEST_CASE("ancestral sampling respects interventional clamps exactly") {
  Graph g(3);
  g.set_edge(0, 1);
  g.set_edge(1, 2);
  DomainConfig dom = DomainConfig::defaults(DomainKind::linear);
  Rng rng(109);
  Mechanisms mechs = sample_mechanisms(g, dom, rng);
  const int64_t n = 50;
  InterventionSpec iv = InterventionSpec::none(n, 3);
  for (int64_t r = 0; r < n; ++r) {
    iv.mask[static_cast<size_t>(r) * 3 + 1] = 1;
    iv.values[static_cast<size_t>(r) * 3 + 1] = 2.5;
  }
  Dataset data = ancestral_sample(g, mechs, iv, n, rng);
  for (int64_t r = 0; r < n; ++r) {
    CHECK_EQ(data.value(r, 1), 2.5);
    CHECK_EQ(data.mask_at(r, 1), 1);
    CHECK_EQ(data.mask_at(r, 0), 0);
  }
}

TEST_CASE("clamping a node removes its dependence on parents") {
  // 0 -> 1 with weight w: under do(X1 = v), X1 ignores X0 entirely
  Graph g(2);
  g.set_edge(0, 1);
  Mechanisms mechs;
  Mechanism root;
  root.kind = Mechanism::Kind::linear;
  mechs.f.push_back(root);
  Mechanism child;
  child.kind = Mechanism::Kind::linear;
  child.parents = {0};
  child.weights = {100.0};
  mechs.f.push_back(child);
  NodeNoise nn;
  nn.sigma = 0.01;
  mechs.noise = {nn, nn};
  const int64_t n = 20;
  InterventionSpec iv = InterventionSpec::none(n, 2);
  for (int64_t r = 0; r < n; ++r) {
    iv.mask[static_cast<size_t>(r) * 2 + 1] = 1;
    iv.values[static_cast<size_t>(r) * 2 + 1] = -7.0;
  }
  Rng rng(113);
  Dataset data = ancestral_sample(g, mechs, iv, n, rng);
  for (int64_t r = 0; r < n; ++r) CHECK_EQ(data.value(r, 1), -7.0);
}

TEST_CASE("linear SCM reproduces its closed-form mean") {
  // x0 = 1 + e0, x1 = 2 x0 + e1 => E[x1] = 2
  Graph g(2);
  g.set_edge(0, 1);
  Mechanisms mechs;
  Mechanism root;
  root.kind = Mechanism::Kind::linear;
  root.bias = 1.0;
  mechs.f.push_back(root);
  Mechanism child;
  child.kind = Mechanism::Kind::linear;
  child.parents = {0};
  child.weights = {2.0};
  mechs.f.push_back(child);
  NodeNoise nn;
  nn.sigma = 0.7;
  mechs.noise = {nn, nn};
  Rng rng(127);
  const int64_t n = 100000;
  Dataset data = ancestral_sample(g, mechs, InterventionSpec::none(n, 2), n, rng);
  double m0 = 0, m1 = 0;
  for (int64_t r = 0; r < n; ++r) {
    m0 += data.value(r, 0);
    m1 += data.value(r, 1);
  }
  CHECK(m0 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(m1 / n == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("heteroscedastic noise scale is bounded below by 0.1") {
  Rng rng(131);
  MechanismRanges r;
  NodeNoise nn;
  nn.heteroscedastic = true;
  nn.h_raw = sample_rff_mechanism({0}, r, rng);
  for (int t = 0; t < 100; ++t) {
    double row[1] = {rng.normal(0.0, 3.0)};
    CHECK(eval_noise_scale(nn, row) > 0.1);
  }
  NodeNoise homo;
  double row[1] = {0.0};
  CHECK_EQ(eval_noise_scale(homo, row), 1.0);
}

TEST_CASE("standardize_columns centers and scales, leaving constants centered") {
  Dataset data(4, 2);
  double vals[8] = {1, 5, 2, 5, 3, 5, 4, 5};
  for (int64_t r = 0; r < 4; ++r)
    for (int j = 0; j < 2; ++j) data.value(r, j) = vals[r * 2 + j];
  data.mask_at(0, 0) = 1;
  standardize_columns(data);
  double mean = 0, var = 0;
  for (int64_t r = 0; r < 4; ++r) mean += data.value(r, 0);
  CHECK(std::abs(mean) < 1e-12);
  for (int64_t r = 0; r < 4; ++r) var += data.value(r, 0) * data.value(r, 0);
  CHECK(var / 4 == doctest::Approx(1.0).epsilon(1e-12));
  for (int64_t r = 0; r < 4; ++r) CHECK_EQ(data.value(r, 1), 0.0);  // constant column centered
  CHECK_EQ(data.mask_at(0, 0), 1);  // mask untouched
}

TEST_CASE("interventional tasks clamp exactly one node in each later row") {
  DomainConfig dom = DomainConfig::defaults(DomainKind::linear);
  dom.interventions.probability = 1.0;
  Rng rng(137);
  const int64_t n = 11;
  Graph g = sample_graph(dom.active_graph(), 6, rng);
  Task task = build_scm_task(g, dom, n, rng);
  const int64_t start = n - n / 2;  // 6
  for (int64_t r = 0; r < start; ++r)
    for (int j = 0; j < 6; ++j) CHECK_EQ(task.data.mask_at(r, j), 0);
  std::vector<int> targets;
  for (int64_t r = start; r < n; ++r) {
    int count = 0, target = -1;
    for (int j = 0; j < 6; ++j) {
      if (task.data.mask_at(r, j)) {
        ++count;
        target = j;
      }
    }
    CHECK_EQ(count, 1);
    REQUIRE(target >= 0);
    CHECK(task.data.value(r, target) >= -3.0);
    CHECK(task.data.value(r, target) <= 3.0);
    targets.push_back(target);
  }
  // targets come from a fixed 50% subset of nodes
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  CHECK(targets.size() <= 3);
}

TEST_CASE("observational tasks have an all-zero mask") {
  DomainConfig dom = DomainConfig::defaults(DomainKind::linear);
  dom.interventions.probability = 0.0;
  Rng rng(139);
  Task task = build_task(dom, 5, 30, rng);
  for (uint8_t m : task.data.mask) CHECK_EQ(m, 0);
  CHECK_EQ(task.g.d, 5);
  CHECK_EQ(task.data.n, 30);
}

TEST_CASE("tiny datasets are rejected") {
  DomainConfig dom = DomainConfig::defaults(DomainKind::linear);
  Rng rng(149);
  CHECK_THROWS_AS(build_task(dom, 3, 1, rng), Error);
}

TEST_CASE("task generation is deterministic in the rng") {
  DomainConfig dom = DomainConfig::defaults(DomainKind::rff);
  Rng r1(151), r2(151);
  Task a = build_task(dom, 4, 40, r1);
  Task b = build_task(dom, 4, 40, r2);
  CHECK(a.g == b.g);
  CHECK(a.data.values == b.data.values);
  CHECK(a.data.mask == b.data.mask);
}

}  // TEST_SUITE
