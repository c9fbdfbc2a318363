#include <cmath>
#include <map>

#include "core/optim.hpp"
#include "doctest.h"

using namespace cadet;

TEST_SUITE("optim") {

TEST_CASE("single step matches a hand-rolled computation") {
  ParamStore store;
  store.add("w", Tensor::from({2}, {1.0, -2.0}));
  std::map<std::string, Tensor> grads;
  grads["w"] = Tensor::from({2}, {0.5, 0.25});

  LambConfig cfg;
  auto skipped = lamb_update(store, grads, 1, 0.1, cfg);
  CHECK(skipped.empty());

  // Adam moments with bias correction at step 1
  double b1 = 0.9, b2 = 0.999, eps = 1e-6;
  double u0, u1;
  {
    double m0 = (1 - b1) * 0.5, v0 = (1 - b2) * 0.25;
    double m1 = (1 - b1) * 0.25, v1 = (1 - b2) * 0.0625;
    double mh0 = m0 / (1 - b1), vh0 = v0 / (1 - b2);
    double mh1 = m1 / (1 - b1), vh1 = v1 / (1 - b2);
    u0 = mh0 / (std::sqrt(vh0) + eps);
    u1 = mh1 / (std::sqrt(vh1) + eps);
  }
  double p_norm = std::sqrt(1.0 + 4.0);
  double u_norm = std::sqrt(u0 * u0 + u1 * u1);
  double ratio = p_norm / u_norm;
  CHECK(store.at("w")[0] == doctest::Approx(1.0 - 0.1 * ratio * u0).epsilon(1e-12));
  CHECK(store.at("w")[1] == doctest::Approx(-2.0 - 0.1 * ratio * u1).epsilon(1e-12));
}

TEST_CASE("trust ratio falls back to 1 for zero-norm parameter or update") {
  ParamStore store;
  store.add("w", Tensor::from({1}, {0.0}));  // zero-norm parameter
  std::map<std::string, Tensor> grads;
  grads["w"] = Tensor::from({1}, {1.0});
  lamb_update(store, grads, 1, 0.01);
  // ratio == 1, u == mhat/(sqrt(vhat)+eps) ~= 1
  CHECK(store.at("w")[0] == doctest::Approx(-0.01).epsilon(1e-4));

  ParamStore store2;
  store2.add("w", Tensor::from({1}, {3.0}));
  std::map<std::string, Tensor> zero;
  zero["w"] = Tensor::from({1}, {0.0});
  lamb_update(store2, zero, 1, 0.01);
  CHECK_EQ(store2.at("w")[0], 3.0);  // zero update
}

TEST_CASE("weight decay enters the update direction") {
  ParamStore store;
  store.add("w", Tensor::from({1}, {2.0}));
  std::map<std::string, Tensor> grads;
  grads["w"] = Tensor::from({1}, {0.0});
  LambConfig cfg;
  cfg.weight_decay = 0.1;
  lamb_update(store, grads, 1, 0.5, cfg);
  // u = 0 + wd*p = 0.2; ratio = |2.0| / 0.2 = 10; step = 0.5 * 10 * 0.2 = 1
  CHECK(store.at("w")[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("missing gradients count as zero but moments still decay") {
  ParamStore store;
  store.add("a", Tensor::from({1}, {1.0}));
  store.add("b", Tensor::from({1}, {1.0}));
  std::map<std::string, Tensor> grads;
  grads["a"] = Tensor::from({1}, {1.0});
  lamb_update(store, grads, 1, 0.1);
  lamb_update(store, grads, 2, 0.1);
  CHECK(store.at("a")[0] < 1.0);
  CHECK_EQ(store.at("b")[0], 1.0);  // zero moments, zero update
}

TEST_CASE("non-finite gradient skips exactly that parameter") {
  ParamStore store;
  store.add("good", Tensor::from({1}, {1.0}));
  store.add("bad", Tensor::from({1}, {1.0}));
  std::map<std::string, Tensor> grads;
  grads["good"] = Tensor::from({1}, {1.0});
  grads["bad"] = Tensor::from({1}, {std::nan("")});
  auto skipped = lamb_update(store, grads, 1, 0.1);
  REQUIRE_EQ(skipped.size(), 1);
  CHECK_EQ(skipped[0], "bad");
  CHECK_EQ(store.at("bad")[0], 1.0);     // untouched
  CHECK_EQ(store.m.count("bad"), 0);     // moments untouched too
  CHECK(store.at("good")[0] < 1.0);
}

TEST_CASE("two steps accumulate momentum") {
  ParamStore store;
  store.add("w", Tensor::from({1}, {1.0}));
  std::map<std::string, Tensor> grads;
  grads["w"] = Tensor::from({1}, {1.0});
  lamb_update(store, grads, 1, 0.0);  // lr 0: only moments move
  CHECK_EQ(store.at("w")[0], 1.0);
  CHECK(store.m.at("w")[0] == doctest::Approx(0.1).epsilon(1e-12));
  lamb_update(store, grads, 2, 0.0);
  CHECK(store.m.at("w")[0] == doctest::Approx(0.19).epsilon(1e-12));
  CHECK(store.v.at("w")[0] == doctest::Approx(0.001999).epsilon(1e-9));
}

TEST_CASE("shape mismatch between parameter and gradient raises") {
  ParamStore store;
  store.add("w", Tensor::from({2}, {1.0, 2.0}));
  std::map<std::string, Tensor> grads;
  grads["w"] = Tensor::from({3}, {1.0, 2.0, 3.0});
  CHECK_THROWS_AS(lamb_update(store, grads, 1, 0.1), Error);
}

}  // TEST_SUITE
