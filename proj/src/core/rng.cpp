#include "core/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cadet {

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t hash_tag(const char* tag) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const char* p = tag; *p; ++p) {
    h ^= static_cast<uint64_t>(static_cast<unsigned char>(*p));
    h *= 0x100000001b3ULL;
  }
  return h;
}

int64_t Rng::uniform_int(int64_t n) {
  if (n <= 0) raise(ErrorKind::invalid_argument, "uniform_int: n must be positive");
  const uint64_t un = static_cast<uint64_t>(n);
  const uint64_t mask = std::bit_ceil(un) - 1;
  for (;;) {
    uint64_t r = eng_() & mask;
    if (r < un) return static_cast<int64_t>(r);
  }
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 in (0,1] so the log is finite.
  double u1 = 1.0 - u01();
  double u2 = u01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

double Rng::laplace(double scale) {
  double u = u01() - 0.5;
  return u >= 0 ? -scale * std::log(1.0 - 2.0 * u) : scale * std::log(1.0 + 2.0 * u);
}

double Rng::cauchy(double scale) { return scale * std::tan(std::numbers::pi * (u01() - 0.5)); }

double Rng::exponential(double rate) {
  if (rate <= 0) raise(ErrorKind::invalid_argument, "exponential: rate must be positive");
  return -std::log(1.0 - u01()) / rate;
}

int64_t Rng::poisson(double lambda) {
  if (lambda < 0) raise(ErrorKind::invalid_argument, "poisson: lambda must be non-negative");
  if (lambda == 0) return 0;
  if (lambda < 30.0) {
    // Knuth's product-of-uniforms method.
    double limit = std::exp(-lambda);
    double prod = u01();
    int64_t k = 0;
    while (prod > limit) {
      prod *= u01();
      ++k;
    }
    return k;
  }
  // Hoermann's PTRS transformed-rejection sampler.
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_lambda = std::log(lambda);
  for (;;) {
    double u = u01() - 0.5;
    double v = u01();
    double us = 0.5 - std::abs(u);
    double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<int64_t>(kf);
    if (kf < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        kf * log_lambda - lambda - std::lgamma(kf + 1.0)) {
      return static_cast<int64_t>(kf);
    }
  }
}

double Rng::gamma(double shape) {
  if (shape <= 0) raise(ErrorKind::invalid_argument, "gamma: shape must be positive");
  if (shape < 1.0) {
    // Boost by one, then scale back (Marsaglia-Tsang trick for shape < 1).
    double u = u01();
    while (u <= 0.0) u = u01();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0) continue;
    double v = t * t * t;
    double u = u01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::beta(double a, double b) {
  double ga = gamma(a);
  double gb = gamma(b);
  double s = ga + gb;
  if (s <= 0) return 0.5;  // astronomically unlikely double underflow
  return ga / s;
}

std::vector<int> Rng::permutation(int n) {
  std::vector<int> p(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
  shuffle(p);
  return p;
}

std::string Rng::state() const {
  std::ostringstream os;
  os << seed_ << ' ' << eng_ << ' ' << (has_spare_ ? 1 : 0) << ' ' << std::hexfloat << spare_;
  return os.str();
}

void Rng::set_state(const std::string& s) {
  std::istringstream is(s);
  int spare_flag = 0;
  is >> seed_ >> eng_ >> spare_flag;
  // hexfloat round-trip: operator>> with std::hexfloat is unreliable pre-C++23,
  // so parse the token with strtod.
  std::string tok;
  is >> tok;
  if (is.fail() || tok.empty()) raise(ErrorKind::io, "Rng::set_state: malformed state string");
  spare_ = std::strtod(tok.c_str(), nullptr);
  has_spare_ = spare_flag != 0;
}

}  // namespace cadet
