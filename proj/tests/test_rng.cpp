#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "core/rng.hpp"
#include "doctest.h"

using namespace cadet;

TEST_SUITE("rng") {

TEST_CASE("same seed reproduces the stream exactly") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK_EQ(a.next_u64(), b.next_u64());
}

TEST_CASE("different seeds give different streams") {
  Rng a(1), b(2);
  int differ = 0;
  for (int i = 0; i < 16; ++i) differ += a.next_u64() != b.next_u64();
  CHECK(differ > 0);
}

TEST_CASE("mix_seed separates salts and is order-sensitive") {
  CHECK(mix_seed(7, 1) != mix_seed(7, 2));
  CHECK(mix_seed(1, 7) != mix_seed(7, 1));
  CHECK_EQ(mix_seed(7, 1), mix_seed(7, 1));
}

TEST_CASE("child streams are independent of parent consumption") {
  Rng parent(99);
  Rng c1 = parent.child(5);
  parent.next_u64();
  Rng c2 = parent.child(5);
  CHECK_EQ(c1.next_u64(), c2.next_u64());  // child depends only on (seed, salt)
  CHECK_EQ(parent.child("tasks").seed(), parent.child(hash_tag("tasks")).seed());
}

TEST_CASE("u01 stays in the half-open unit interval") {
  Rng r(3);
  for (int i = 0; i < 10000; ++i) {
    double u = r.u01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform_int covers its range uniformly") {
  Rng r(11);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    int64_t v = r.uniform_int(7);
    REQUIRE(v >= 0);
    REQUIRE(v < 7);
    counts[static_cast<size_t>(v)]++;
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);  // ~5 sigma
}

TEST_CASE("normal matches first two moments") {
  Rng r(17);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 0.02);
  CHECK(std::abs(s2 / n - 1.0) < 0.03);
}

TEST_CASE("laplace has variance 2 scale^2") {
  Rng r(23);
  double s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double x = r.laplace(0.5);
    s2 += x * x;
  }
  CHECK(s2 / n == doctest::Approx(2 * 0.25).epsilon(0.05));
}

TEST_CASE("exponential has mean 1/rate") {
  Rng r(29);
  double s = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) s += r.exponential(2.0);
  CHECK(s / n == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("poisson has matching mean and variance") {
  Rng r(31);
  double s = 0, s2 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double x = static_cast<double>(r.poisson(3.7));
    s += x;
    s2 += x * x;
  }
  double mean = s / n, var = s2 / n - mean * mean;
  CHECK(mean == doctest::Approx(3.7).epsilon(0.03));
  CHECK(var == doctest::Approx(3.7).epsilon(0.05));
}

TEST_CASE("poisson handles large rates") {
  Rng r(37);
  double s = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) s += static_cast<double>(r.poisson(400.0));
  CHECK(s / n == doctest::Approx(400.0).epsilon(0.01));
}

TEST_CASE("beta matches its mean") {
  Rng r(41);
  double s = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double x = r.beta(0.2588, 0.2499);
    REQUIRE(x >= 0.0);
    REQUIRE(x <= 1.0);
    s += x;
  }
  CHECK(s / n == doctest::Approx(0.2588 / (0.2588 + 0.2499)).epsilon(0.02));
}

TEST_CASE("cauchy median is zero") {
  Rng r(43);
  std::vector<double> xs(10001);
  for (auto& x : xs) x = r.cauchy(1.0);
  std::nth_element(xs.begin(), xs.begin() + 5000, xs.end());
  CHECK(std::abs(xs[5000]) < 0.05);
}

TEST_CASE("permutation is a bijection") {
  Rng r(47);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> p = r.permutation(12);
    REQUIRE_EQ(p.size(), 12);
    std::set<int> seen(p.begin(), p.end());
    CHECK_EQ(seen.size(), 12);
    CHECK_EQ(*seen.begin(), 0);
    CHECK_EQ(*seen.rbegin(), 11);
  }
}

TEST_CASE("state round-trips through serialization") {
  Rng r(53);
  for (int i = 0; i < 7; ++i) r.normal();  // leaves a Box-Muller spare in flight
  std::string s = r.state();
  Rng q(0);
  q.set_state(s);
  for (int i = 0; i < 50; ++i) {
    CHECK_EQ(r.next_u64(), q.next_u64());
    CHECK_EQ(r.normal(), q.normal());
  }
}

}  // TEST_SUITE
