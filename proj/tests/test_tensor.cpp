#include <cmath>

#include "core/tensor.hpp"
#include "doctest.h"

using namespace cadet;

TEST_SUITE("tensor") {

TEST_CASE("construction and scalars") {
  Tensor t({2, 3}, 1.5);
  CHECK_EQ(t.numel(), 6);
  CHECK_EQ(t.rank(), 2);
  CHECK_EQ(t[5], 1.5);
  Tensor s = Tensor::scalar(4.0);
  CHECK_EQ(s.rank(), 0);
  CHECK_EQ(s.numel(), 1);
  CHECK_EQ(s[0], 4.0);
  CHECK_THROWS_AS(Tensor::from({2, 2}, {1.0, 2.0}), Error);
}

TEST_CASE("suffix broadcasting rules") {
  CHECK(suffix_broadcastable({2, 3, 4}, {3, 4}));
  CHECK(suffix_broadcastable({2, 3, 4}, {4}));
  CHECK(suffix_broadcastable({2, 3, 4}, {}));
  CHECK(suffix_broadcastable({2, 3, 4}, {2, 3, 4}));
  CHECK_FALSE(suffix_broadcastable({2, 3, 4}, {3}));
  CHECK_FALSE(suffix_broadcastable({2, 3, 4}, {2, 3}));
}

TEST_CASE("broadcast add and mul") {
  Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
  Tensor b = Tensor::from({2}, {10, 20});
  Tensor c = bc_add(a, b);
  CHECK_EQ(c.shape, std::vector<int64_t>({2, 2}));
  CHECK_EQ(c[0], 11);
  CHECK_EQ(c[1], 22);
  CHECK_EQ(c[2], 13);
  CHECK_EQ(c[3], 24);
  Tensor m = bc_mul(a, Tensor::scalar(3.0));
  CHECK_EQ(m[3], 12);
  Tensor d = bc_sub(a, b);
  CHECK_EQ(d[0], -9);
  CHECK_EQ(d[3], -16);
}

TEST_CASE("reduce_to_shape sums over leading and broadcast axes") {
  Tensor g = Tensor::from({2, 2}, {1, 2, 3, 4});
  Tensor r = reduce_to_shape(g, {2});
  CHECK_EQ(r.shape, std::vector<int64_t>({2}));
  CHECK_EQ(r[0], 4);   // 1 + 3
  CHECK_EQ(r[1], 6);   // 2 + 4
  Tensor s = reduce_to_shape(g, {});
  CHECK_EQ(s.rank(), 0);
  CHECK_EQ(s[0], 10);
  Tensor same = reduce_to_shape(g, {2, 2});
  CHECK_EQ(same[2], 3);
}

TEST_CASE("matmul rank-2") {
  Tensor a = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b = Tensor::from({3, 2}, {7, 8, 9, 10, 11, 12});
  Tensor c = matmul(a, b);
  CHECK_EQ(c.shape, std::vector<int64_t>({2, 2}));
  CHECK_EQ(c[0], 58);
  CHECK_EQ(c[1], 64);
  CHECK_EQ(c[2], 139);
  CHECK_EQ(c[3], 154);
}

TEST_CASE("matmul batched and rank-2 broadcast") {
  Tensor a = Tensor::from({2, 1, 2}, {1, 2, 3, 4});     // two 1x2 matrices
  Tensor b = Tensor::from({2, 2, 1}, {5, 6, 7, 8});     // two 2x1 matrices
  Tensor c = matmul(a, b);
  CHECK_EQ(c.shape, std::vector<int64_t>({2, 1, 1}));
  CHECK_EQ(c[0], 17);   // 1*5 + 2*6
  CHECK_EQ(c[1], 53);   // 3*7 + 4*8
  Tensor w = Tensor::from({2, 2}, {1, 0, 0, 2});
  Tensor x = Tensor::from({2, 1, 2}, {1, 2, 3, 4});
  Tensor y = matmul(x, w);  // rank-2 rhs broadcast over batch
  CHECK_EQ(y.shape, std::vector<int64_t>({2, 1, 2}));
  CHECK_EQ(y[0], 1);
  CHECK_EQ(y[1], 4);
  CHECK_EQ(y[2], 3);
  CHECK_EQ(y[3], 8);
  CHECK_THROWS_AS(matmul(Tensor({2, 3}), Tensor({2, 2})), Error);
}

TEST_CASE("transpose with general permutation") {
  Tensor a = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor t = transpose(a, {1, 0});
  CHECK_EQ(t.shape, std::vector<int64_t>({3, 2}));
  CHECK_EQ(t[0], 1);
  CHECK_EQ(t[1], 4);
  CHECK_EQ(t[2], 2);
  Tensor b({2, 3, 4});
  for (int64_t i = 0; i < b.numel(); ++i) b[i] = static_cast<double>(i);
  Tensor u = transpose(b, {2, 0, 1});
  CHECK_EQ(u.shape, std::vector<int64_t>({4, 2, 3}));
  // u[k][i][j] == b[i][j][k]
  CHECK_EQ(u[0], b[0]);
  CHECK_EQ(u[1 * 2 * 3 + 1 * 3 + 2], b[1 * 3 * 4 + 2 * 4 + 1]);
  CHECK_EQ(inverse_perm({2, 0, 1}), std::vector<int>({1, 2, 0}));
}

TEST_CASE("reshape preserves data and checks size") {
  Tensor a = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor r = reshape(a, {3, 2});
  CHECK_EQ(r[4], 5);
  CHECK_THROWS_AS(reshape(a, {4, 2}), Error);
}

TEST_CASE("elementwise nonlinearities") {
  Tensor a = Tensor::from({4}, {-1.0, 0.0, 0.5, 2.0});
  Tensor r = relu(a);
  CHECK_EQ(r[0], 0.0);
  CHECK_EQ(r[3], 2.0);
  Tensor l = logistic(a);
  CHECK(l[1] == doctest::Approx(0.5));
  CHECK(l[3] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
  Tensor c = clamp(a, -0.5, 1.0);
  CHECK_EQ(c[0], -0.5);
  CHECK_EQ(c[3], 1.0);
  CHECK_EQ(c[2], 0.5);
  Tensor e = exp_(a);
  CHECK(e[3] == doctest::Approx(std::exp(2.0)));
  Tensor s = scale(a, -2.0);
  CHECK_EQ(s[0], 2.0);
}

TEST_CASE("log of non-positive input raises a numeric error") {
  CHECK_THROWS_AS(log_(Tensor::from({2}, {1.0, 0.0})), Error);
}

TEST_CASE("softmax normalizes along the requested axis") {
  Tensor a = Tensor::from({2, 3}, {1, 2, 3, 1, 1, 1});
  Tensor s = softmax(a, 1);
  CHECK(s[0] + s[1] + s[2] == doctest::Approx(1.0));
  CHECK(s[3] == doctest::Approx(1.0 / 3));
  CHECK(s[1] / s[0] == doctest::Approx(std::exp(1.0)));
  Tensor s0 = softmax(a, 0);
  CHECK(s0[0] + s0[3] == doctest::Approx(1.0));
}

TEST_CASE("softmax is shift-invariant at large magnitudes") {
  Tensor a = Tensor::from({1, 2}, {1000.0, 1001.0});
  Tensor s = softmax(a, 1);
  CHECK(s[1] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("maxreduce tracks the winning index") {
  Tensor a = Tensor::from({2, 3}, {1, 5, 2, 7, 0, 7});
  std::vector<int64_t> arg;
  Tensor m = maxreduce(a, 1, &arg);
  CHECK_EQ(m.shape, std::vector<int64_t>({2}));
  CHECK_EQ(m[0], 5);
  CHECK_EQ(m[1], 7);
  CHECK_EQ(arg[0], 1);
  CHECK_EQ(arg[1], 0);  // first maximum wins on ties
  Tensor g = Tensor::from({2}, {1.0, 2.0});
  Tensor back = maxreduce_backward(g, {2, 3}, 1, arg);
  CHECK_EQ(back[1], 1.0);
  CHECK_EQ(back[3], 2.0);
  CHECK_EQ(back[5], 0.0);
}

TEST_CASE("layernorm produces zero mean and unit variance rows") {
  Tensor x = Tensor::from({2, 4}, {1, 2, 3, 4, -1, 0, 1, 2});
  Tensor gain({4}, 1.0), offset({4}, 0.0);
  Tensor xhat, inv_std;
  Tensor y = layernorm(x, gain, offset, &xhat, &inv_std);
  for (int r = 0; r < 2; ++r) {
    double mean = 0, var = 0;
    for (int c = 0; c < 4; ++c) mean += y[r * 4 + c];
    mean /= 4;
    for (int c = 0; c < 4; ++c) var += (y[r * 4 + c] - mean) * (y[r * 4 + c] - mean);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(var / 4 == doctest::Approx(1.0).epsilon(1e-6));
  }
  Tensor gain2 = Tensor::from({4}, {2, 2, 2, 2});
  Tensor offset2 = Tensor::from({4}, {1, 1, 1, 1});
  Tensor y2 = layernorm(x, gain2, offset2, &xhat, &inv_std);
  CHECK(y2[0] == doctest::Approx(2 * y[0] + 1));
}

TEST_CASE("sum_all and accumulate") {
  Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
  CHECK_EQ(sum_all(a)[0], 10.0);
  Tensor acc;
  accumulate(acc, a);
  accumulate(acc, a);
  CHECK_EQ(acc[3], 8.0);
  CHECK_EQ(l2_norm(Tensor::from({2}, {3.0, 4.0})), 5.0);
}

TEST_CASE("ensure_finite rejects NaN and infinity") {
  Tensor bad = Tensor::from({2}, {1.0, std::nan("")});
  CHECK_THROWS_AS(ensure_finite(bad, "test"), Error);
  CHECK_FALSE(all_finite(Tensor::from({1}, {INFINITY})));
  CHECK(all_finite(Tensor::from({1}, {1e308})));
}

}  // TEST_SUITE
