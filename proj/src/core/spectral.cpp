#include "core/spectral.hpp"

#include <cmath>

namespace cadet {

namespace {

constexpr double kTiny = 1e-12;

double vec_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

// Returns the estimate and, when mult != nullptr, the constant gradient
// multiplier M = a b' / (a'b).
double power_estimate(const Tensor& w, int t, Rng& rng, Tensor* mult) {
  if (w.rank() != 2 || w.shape[0] != w.shape[1])
    raise(ErrorKind::invalid_argument, "spectral penalty expects a square matrix");
  const int64_t d = w.shape[0];
  for (double e : w.data)
    if (!(e >= 0.0)) raise(ErrorKind::invalid_argument, "spectral penalty expects entries >= 0");
  if (t < 1) raise(ErrorKind::invalid_argument, "need at least one power iteration");
  if (mult) *mult = Tensor({d, d});

  std::vector<double> a(d), b(d), prev_a(d), prev_b(d), tmp(d);
  for (int attempt = 0; attempt < 2; ++attempt) {
    for (auto& e : a) e = rng.normal();
    for (auto& e : b) e = rng.normal();
    double na = vec_norm(a), nb = vec_norm(b);
    if (na < kTiny || nb < kTiny) continue;  // astronomically unlikely; redraw
    for (auto& e : a) e /= na;
    for (auto& e : b) e /= nb;
    prev_a = a;
    prev_b = b;
    for (int s = 0; s < t; ++s) {
      prev_a = a;
      prev_b = b;
      for (int64_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int64_t i = 0; i < d; ++i) acc += a[static_cast<size_t>(i)] * w[i * d + j];
        tmp[static_cast<size_t>(j)] = acc;
      }
      na = vec_norm(tmp);
      if (na < kTiny) return 0.0;
      for (int64_t j = 0; j < d; ++j) a[static_cast<size_t>(j)] = tmp[static_cast<size_t>(j)] / na;
      for (int64_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int64_t j = 0; j < d; ++j) acc += w[i * d + j] * b[static_cast<size_t>(j)];
        tmp[static_cast<size_t>(i)] = acc;
      }
      nb = vec_norm(tmp);
      if (nb < kTiny) return 0.0;
      for (int64_t i = 0; i < d; ++i) b[static_cast<size_t>(i)] = tmp[static_cast<size_t>(i)] / nb;
    }
    // Damp period-2 oscillation; falls back to the raw iterate if the two
    // phases cancel.
    std::vector<double> am(d), bm(d);
    for (int64_t i = 0; i < d; ++i) {
      am[static_cast<size_t>(i)] = 0.5 * (a[static_cast<size_t>(i)] + prev_a[static_cast<size_t>(i)]);
      bm[static_cast<size_t>(i)] = 0.5 * (b[static_cast<size_t>(i)] + prev_b[static_cast<size_t>(i)]);
    }
    double nam = vec_norm(am), nbm = vec_norm(bm);
    if (nam >= kTiny && nbm >= kTiny) {
      for (int64_t i = 0; i < d; ++i) {
        a[static_cast<size_t>(i)] = am[static_cast<size_t>(i)] / nam;
        b[static_cast<size_t>(i)] = bm[static_cast<size_t>(i)] / nbm;
      }
    }
    double ab = 0.0;
    for (int64_t i = 0; i < d; ++i) ab += a[static_cast<size_t>(i)] * b[static_cast<size_t>(i)];
    if (std::abs(ab) < kTiny) continue;  // degenerate pairing; redraw once
    double awb = 0.0;
    for (int64_t i = 0; i < d; ++i)
      for (int64_t j = 0; j < d; ++j)
        awb += a[static_cast<size_t>(i)] * w[i * d + j] * b[static_cast<size_t>(j)];
    if (mult) {
      for (int64_t i = 0; i < d; ++i)
        for (int64_t j = 0; j < d; ++j)
          (*mult)[i * d + j] = a[static_cast<size_t>(i)] * b[static_cast<size_t>(j)] / ab;
    }
    return awb / ab;
  }
  CADET_LOG_WARN("power iteration produced near-orthogonal vectors twice; treating penalty as 0");
  return 0.0;
}

}  // namespace

double spectral_penalty(const Tensor& w, int t, Rng& rng) {
  return power_estimate(w, t, rng, nullptr);
}

Var spectral_penalty_var(Tape& tape, const Var& w, int t, Rng& rng) {
  Tensor mult;
  double h = power_estimate(w.v(), t, rng, &mult);
  if (h == 0.0 && l2_norm(mult) == 0.0) return Tape::constant(Tensor::scalar(0.0));
  return t_sum(tape, t_mul(tape, w, Tape::constant(std::move(mult))));
}

}  // namespace cadet
