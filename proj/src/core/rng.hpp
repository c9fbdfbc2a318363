#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace cadet {

// Splitmix64 finalizer; used to derive independent sub-stream seeds.
uint64_t mix_seed(uint64_t seed, uint64_t salt);
uint64_t hash_tag(const char* tag);

// Deterministic RNG wrapper around mt19937_64 with hand-rolled distributions,
// so that sampled values are identical across platforms and library versions.
// State (including the Box-Muller spare) is serializable for exact resume.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : seed_(seed), eng_(seed) {}

  uint64_t seed() const { return seed_; }
  Rng child(uint64_t salt) const { return Rng(mix_seed(seed_, salt)); }
  Rng child(const char* tag) const { return child(hash_tag(tag)); }

  uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1) with 53 random bits.
  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * u01(); }
  // Uniform integer on [0, n).
  int64_t uniform_int(int64_t n);
  bool bernoulli(double p) { return u01() < p; }

  double normal();
  double normal(double mu, double sigma) { return mu + sigma * normal(); }
  double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }
  double laplace(double scale);
  double cauchy(double scale);
  double exponential(double rate);
  int64_t poisson(double lambda);
  double gamma(double shape);  // unit scale
  double beta(double a, double b);

  std::vector<int> permutation(int n);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (int64_t i = static_cast<int64_t>(v.size()) - 1; i > 0; --i) {
      std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(uniform_int(i + 1))]);
    }
  }

  std::string state() const;
  void set_state(const std::string& s);

 private:
  uint64_t seed_ = 0;
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cadet
