#include "core/suites.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "core/grn.hpp"
#include "core/scm.hpp"
#include "core/spectral.hpp"

namespace cadet {

namespace {

constexpr uint64_t kEvalSeed = 1234;

void add_check(SuiteResult& r, std::string name, bool pass, json details) {
  if (!pass) r.pass = false;
  r.checks.push_back(SuiteCheck{std::move(name), pass, std::move(details)});
}

void absorb(SuiteResult& into, const SuiteResult& part) {
  if (!part.pass) into.pass = false;
  into.checks.insert(into.checks.end(), part.checks.begin(), part.checks.end());
}

struct MeanSe {
  double mean = 0.0, se = 0.0;
  int count = 0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe m;
  m.count = static_cast<int>(xs.size());
  if (xs.empty()) return m;
  double s = 0.0;
  for (double x : xs) s += x;
  m.mean = s / m.count;
  if (m.count > 1) {
    double v = 0.0;
    for (double x : xs) v += (x - m.mean) * (x - m.mean);
    v /= (m.count - 1);
    m.se = std::sqrt(v / m.count);
  }
  return m;
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  size_t m = xs.size();
  return (m % 2 == 1) ? xs[m / 2] : 0.5 * (xs[m / 2 - 1] + xs[m / 2]);
}

// ---------------------------------------------------------------------------
// Gradient checks: small composite programs touching every differentiable op,
// verified against central finite differences.
// ---------------------------------------------------------------------------

struct GcLeaves {
  Tensor X, W1, b1, gain, offset, W2;
};

struct GcBuilt {
  Var loss;
  std::map<std::string, Var> leaves;
  Tensor h;   // pre-activation (kink margins)
  Tensor y;   // normalization input (spread margin)
  Tensor z4;  // pre-maxpool (tie margin)
};

GcBuilt gc_build(Tape& tape, int variant, const GcLeaves& lv) {
  GcBuilt out;
  Var X = tape.leaf(lv.X);
  Var W1 = tape.leaf(lv.W1);
  Var b1 = tape.leaf(lv.b1);
  Var gain = tape.leaf(lv.gain);
  Var offset = tape.leaf(lv.offset);
  Var W2 = tape.leaf(lv.W2);
  out.leaves = {{"X", X},       {"W1", W1},         {"b1", b1},
                {"gain", gain}, {"offset", offset}, {"W2", W2}};

  Var h = t_add(tape, t_matmul(tape, X, W1), b1);  // (B,T,K)
  out.h = h.v();
  Var y;
  switch (variant) {
    case 0: y = t_relu(tape, t_sub(tape, h, Tape::constant(Tensor(h.v().shape, 0.2)))); break;
    case 1: y = t_log(tape, t_logistic(tape, h)); break;
    case 2: y = t_clamp(tape, h, -1.0, 1.0); break;
    case 3: y = t_mul(tape, t_softmax(tape, h, 2), X); break;
    default: y = t_exp(tape, t_scale(tape, h, 0.3)); break;
  }
  out.y = y.v();
  Var z = t_layernorm(tape, y, gain, offset);
  const auto& sh = z.v().shape;  // (B,T,K)
  Var z2 = t_transpose(tape, z, {1, 0, 2});
  Var z3 = t_reshape(tape, z2, {sh[1], sh[0] * sh[2]});
  Var z4 = t_matmul(tape, z3, W2);  // (T,C)
  out.z4 = z4.v();
  Var m = t_maxpool(tape, z4, 0);  // (C)
  out.loss = t_sum(tape, t_mul(tape, m, m));
  return out;
}

// Finite differences need the program to stay on one side of every kink over
// the probe interval, so redraw inputs until every margin clears 1e-3.
bool gc_margins_ok(int variant, const GcBuilt& b) {
  const double margin = 1e-3;
  if (variant == 0) {
    for (double v : b.h.data)
      if (std::abs(v - 0.2) < margin) return false;
  } else if (variant == 2) {
    for (double v : b.h.data)
      if (std::abs(v - 1.0) < margin || std::abs(v + 1.0) < margin) return false;
  }
  const int64_t k = b.y.shape.back();
  const int64_t rows = b.y.numel() / k;
  for (int64_t r = 0; r < rows; ++r) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int64_t c = 0; c < k; ++c) {
      double v = b.y[r * k + c];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo < margin) return false;
  }
  const int64_t T = b.z4.shape[0], C = b.z4.shape[1];
  for (int64_t c = 0; c < C; ++c) {
    double top1 = -std::numeric_limits<double>::infinity(), top2 = top1;
    for (int64_t t = 0; t < T; ++t) {
      double v = b.z4[t * C + c];
      if (v > top1) {
        top2 = top1;
        top1 = v;
      } else if (v > top2) {
        top2 = v;
      }
    }
    if (T > 1 && top1 - top2 < margin) return false;
  }
  return true;
}

GcLeaves gc_draw(int64_t B, int64_t T, int64_t K, int64_t C, Rng& rng) {
  auto fill = [&](std::vector<int64_t> sh, double scale, double shift = 0.0) {
    Tensor t(std::move(sh));
    for (auto& e : t.data) e = shift + scale * rng.normal();
    return t;
  };
  GcLeaves lv;
  lv.X = fill({B, T, K}, 1.0);
  lv.W1 = fill({K, K}, 0.6);
  lv.b1 = fill({K}, 0.4);
  lv.gain = fill({K}, 0.15, 1.0);
  lv.offset = fill({K}, 0.2);
  lv.W2 = fill({B * K, C}, 1.0 / std::sqrt(static_cast<double>(B * K)));
  return lv;
}

double gc_eval(int variant, const GcLeaves& lv) {
  Tape tape;
  tape.recording = false;
  return gc_build(tape, variant, lv).loss.v()[0];
}

}  // namespace

SuiteResult run_gradient_checks(uint64_t seed) {
  SuiteResult res{"gradients", true, {}};
  Rng base(mix_seed(seed, hash_tag("gradient_checks")));
  const char* names[] = {"X", "W1", "b1", "gain", "offset", "W2"};
  for (int k = 0; k < 20; ++k) {
    Rng rng = base.child(static_cast<uint64_t>(k));
    const int variant = k % 5;
    const int64_t B = 2 + (k % 2), T = 3 + ((k / 2) % 2), K = 3 + ((k / 4) % 2), C = 3;
    GcLeaves lv;
    Tape tape;
    GcBuilt built;
    bool margins = false;
    int attempts = 0;
    while (attempts < 20 && !margins) {
      ++attempts;
      lv = gc_draw(B, T, K, C, rng);
      tape = Tape{};
      built = gc_build(tape, variant, lv);
      margins = gc_margins_ok(variant, built);
    }
    double max_rel = 0.0;
    if (margins) {
      std::vector<Tensor> grads = tape.backward(built.loss);
      Tensor* leaf_ptrs[] = {&lv.X, &lv.W1, &lv.b1, &lv.gain, &lv.offset, &lv.W2};
      for (int li = 0; li < 6; ++li) {
        Tensor g = Tape::grad_of(grads, built.leaves.at(names[li]));
        Tensor& x = *leaf_ptrs[li];
        for (int64_t i = 0; i < x.numel(); ++i) {
          const double orig = x[i];
          const double eps = 1e-5 * std::max(1.0, std::abs(orig));
          x[i] = orig + eps;
          double lp = gc_eval(variant, lv);
          x[i] = orig - eps;
          double lm = gc_eval(variant, lv);
          x[i] = orig;
          double fd = (lp - lm) / (2.0 * eps);
          double rel = std::abs(fd - g[i]) / std::max({1.0, std::abs(fd), std::abs(g[i])});
          max_rel = std::max(max_rel, rel);
        }
      }
    }
    add_check(res, "grad_check_" + std::to_string(k), margins && max_rel <= 1e-4,
              json{{"variant", variant},
                   {"B", B},
                   {"T", T},
                   {"K", K},
                   {"max_rel_err", max_rel},
                   {"attempts", attempts},
                   {"margins_ok", margins}});
  }
  return res;
}

// ---------------------------------------------------------------------------
// Permutation invariance / equivariance of the posterior map.
// ---------------------------------------------------------------------------

namespace {

Dataset random_dataset(int64_t n, int d, Rng& rng) {
  Dataset ds(n, d);
  for (auto& v : ds.values) v = rng.normal();
  for (auto& m : ds.mask) m = rng.bernoulli(0.2) ? 1 : 0;
  return ds;
}

}  // namespace

SuiteResult run_invariance_checks(const std::string& checkpoint, uint64_t seed) {
  SuiteResult res{"invariance", true, {}};
  ParamStore store;
  ModelConfig model;
  if (!checkpoint.empty()) {
    Checkpoint ck = load_checkpoint(checkpoint);
    store = std::move(ck.store);
    model = ck.model;
  } else {
    Rng init(mix_seed(seed, hash_tag("invariance_init")));
    init_params(store, model, init);
  }
  struct Size {
    int64_t n;
    int d;
  };
  const Size sizes[] = {{40, 6}, {300, 25}};
  const uint64_t base = mix_seed(seed, hash_tag("invariance"));
  for (int si = 0; si < 2; ++si) {
    const int64_t n = sizes[si].n;
    const int d = sizes[si].d;
    double worst_row = 0.0, worst_col = 0.0;
    for (int k = 0; k < 20; ++k) {
      Rng rng(mix_seed(base, static_cast<uint64_t>(si) * 1000 + static_cast<uint64_t>(k)));
      Dataset ds = random_dataset(n, d, rng);
      Tensor theta = predict_theta(store, model, ds);

      std::vector<int> rp = rng.permutation(static_cast<int>(n));
      Dataset dr(n, d);
      for (int64_t r = 0; r < n; ++r) {
        for (int j = 0; j < d; ++j) {
          dr.value(r, j) = ds.value(rp[static_cast<size_t>(r)], j);
          dr.mask_at(r, j) = ds.mask_at(rp[static_cast<size_t>(r)], j);
        }
      }
      Tensor theta_r = predict_theta(store, model, dr);
      for (int64_t i = 0; i < theta.numel(); ++i)
        worst_row = std::max(worst_row, std::abs(theta_r[i] - theta[i]));

      std::vector<int> cp = rng.permutation(d);
      Dataset dc(n, d);
      for (int64_t r = 0; r < n; ++r) {
        for (int j = 0; j < d; ++j) {
          dc.value(r, j) = ds.value(r, cp[static_cast<size_t>(j)]);
          dc.mask_at(r, j) = ds.mask_at(r, cp[static_cast<size_t>(j)]);
        }
      }
      Tensor theta_c = predict_theta(store, model, dc);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          double want = theta[static_cast<int64_t>(cp[static_cast<size_t>(i)]) * d +
                              cp[static_cast<size_t>(j)]];
          worst_col = std::max(worst_col, std::abs(theta_c[static_cast<int64_t>(i) * d + j] - want));
        }
      }
    }
    std::string tag = "_n" + std::to_string(n) + "_d" + std::to_string(d);
    add_check(res, "row_permutation_invariance" + tag, worst_row <= 1e-4,
              json{{"max_abs_diff", worst_row}, {"pairs", 20}});
    add_check(res, "column_permutation_equivariance" + tag, worst_col <= 1e-4,
              json{{"max_abs_diff", worst_col}, {"pairs", 20}});
  }
  return res;
}

// ---------------------------------------------------------------------------
// Spectral-radius penalty vs a dense eigensolver, plus a cost-scaling probe.
// ---------------------------------------------------------------------------

double dense_spectral_radius(const Tensor& w) {
  if (w.rank() != 2 || w.shape[0] != w.shape[1])
    raise(ErrorKind::invalid_argument, "dense_spectral_radius needs a square matrix");
  const int64_t d = w.shape[0];
  Eigen::MatrixXd m(d, d);
  for (int64_t i = 0; i < d; ++i)
    for (int64_t j = 0; j < d; ++j) m(i, j) = w[i * d + j];
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

SuiteResult run_spectral_checks(uint64_t seed) {
  SuiteResult res{"spectral", true, {}};
  Rng base(mix_seed(seed, hash_tag("spectral_checks")));

  double max_rel = 0.0;
  for (int k = 0; k < 100; ++k) {
    Rng rng = base.child(static_cast<uint64_t>(k));
    const int64_t d = 2 + (k % 19);
    const double s = rng.uniform(0.5, 2.0);
    Tensor w({d, d});
    for (auto& e : w.data) e = s * rng.uniform(0.2, 1.2);
    double est = spectral_penalty(w, 10, rng);
    double exact = dense_spectral_radius(w);
    max_rel = std::max(max_rel, std::abs(est - exact) / std::max(exact, 1e-12));
  }
  add_check(res, "spectral_random_vs_eigensolver", max_rel <= 1e-2,
            json{{"max_rel_err", max_rel}, {"matrices", 100}});

  double max_abs = 0.0;
  for (int k = 0; k < 100; ++k) {
    Rng rng = base.child(1000 + static_cast<uint64_t>(k));
    const int d = 2 + (k % 9);
    Tensor tri({static_cast<int64_t>(d), static_cast<int64_t>(d)});
    bool any = false;
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) {
        if (rng.bernoulli(0.6)) {
          tri[static_cast<int64_t>(i) * d + j] = rng.uniform(0.2, 1.2);
          any = true;
        }
      }
    }
    if (!any) tri[1] = 1.0;
    std::vector<int> p = rng.permutation(d);
    Tensor w({static_cast<int64_t>(d), static_cast<int64_t>(d)});
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        w[static_cast<int64_t>(p[static_cast<size_t>(i)]) * d + p[static_cast<size_t>(j)]] =
            tri[static_cast<int64_t>(i) * d + j];
    double est = spectral_penalty(w, 10, rng);
    max_abs = std::max(max_abs, std::abs(est));
  }
  add_check(res, "spectral_nilpotent_exact_zero", max_abs <= 1e-6,
            json{{"max_abs", max_abs}, {"matrices", 100}});

  std::vector<double> ratios, t_small, t_big;
  const int reps = 30;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng = base.child(2000 + static_cast<uint64_t>(trial));
    auto make = [&](int64_t d) {
      Tensor w({d, d});
      for (auto& e : w.data) e = rng.uniform(0.2, 1.2);
      return w;
    };
    Tensor w100 = make(100), w200 = make(200);
    auto time_of = [&](const Tensor& w) {
      double sink = 0.0;
      auto t0 = std::chrono::steady_clock::now();
      for (int r = 0; r < reps; ++r) sink += spectral_penalty(w, 10, rng);
      auto t1 = std::chrono::steady_clock::now();
      double us = std::chrono::duration<double, std::micro>(t1 - t0).count();
      return std::make_pair(us, sink);
    };
    auto [us100, s100] = time_of(w100);
    auto [us200, s200] = time_of(w200);
    (void)s100;
    (void)s200;
    t_small.push_back(us100);
    t_big.push_back(us200);
    ratios.push_back(us100 > 0.0 ? us200 / us100 : 1.0);
  }
  double med = median(ratios);
  add_check(res, "spectral_cost_scaling_d200_vs_d100", med <= 5.0,
            json{{"median_ratio", med},
                 {"median_us_d100", median(t_small)},
                 {"median_us_d200", median(t_big)},
                 {"trials", 20},
                 {"reps_per_trial", reps}});
  return res;
}

// ---------------------------------------------------------------------------
// Ranking areas vs brute-force oracles.
// ---------------------------------------------------------------------------

RankAreas rank_areas_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    raise(ErrorKind::invalid_argument, "scores/labels length mismatch");
  std::vector<double> pos, neg;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i])
      pos.push_back(scores[i]);
    else
      neg.push_back(scores[i]);
  }
  RankAreas out;
  if (!pos.empty() && !neg.empty()) {
    double wins = 0.0;
    for (double p : pos) {
      for (double q : neg) {
        if (p > q)
          wins += 1.0;
        else if (p == q)
          wins += 0.5;
      }
    }
    out.auroc = wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
  }
  if (!pos.empty()) {
    std::vector<double> uniq(scores);
    std::sort(uniq.begin(), uniq.end(), std::greater<double>());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    double ap = 0.0, r_prev = 0.0;
    for (double tau : uniq) {
      int64_t tp = 0, fp = 0;
      for (double p : pos)
        if (p >= tau) ++tp;
      for (double q : neg)
        if (q >= tau) ++fp;
      double recall = static_cast<double>(tp) / static_cast<double>(pos.size());
      double prec = static_cast<double>(tp) / static_cast<double>(tp + fp);
      ap += (recall - r_prev) * prec;
      r_prev = recall;
    }
    out.auprc = ap;
  }
  return out;
}

SuiteResult run_ranking_checks(uint64_t seed) {
  SuiteResult res{"ranking", true, {}};
  Rng base(mix_seed(seed, hash_tag("ranking_checks")));
  double roc_diff = 0.0, prc_diff = 0.0;
  int presence_mismatches = 0, absent_cases = 0;
  for (int k = 0; k < 200; ++k) {
    Rng rng = base.child(static_cast<uint64_t>(k));
    const int len = 10 + static_cast<int>(rng.uniform_int(51));
    std::vector<double> scores(static_cast<size_t>(len));
    std::vector<int> labels(static_cast<size_t>(len));
    for (auto& s : scores) s = (k % 2 == 0) ? std::round(rng.u01() * 10.0) / 10.0 : rng.u01();
    if (k % 17 == 0) {
      std::fill(labels.begin(), labels.end(), 1);
    } else if (k % 23 == 0) {
      std::fill(labels.begin(), labels.end(), 0);
    } else {
      for (auto& l : labels) l = rng.bernoulli(0.3) ? 1 : 0;
    }
    RankAreas got = rank_areas(scores, labels);
    RankAreas want = rank_areas_oracle(scores, labels);
    if (got.auroc.has_value() != want.auroc.has_value() ||
        got.auprc.has_value() != want.auprc.has_value()) {
      ++presence_mismatches;
      continue;
    }
    if (got.auroc)
      roc_diff = std::max(roc_diff, std::abs(*got.auroc - *want.auroc));
    else
      ++absent_cases;
    if (got.auprc) prc_diff = std::max(prc_diff, std::abs(*got.auprc - *want.auprc));
  }
  add_check(res, "auroc_matches_pair_counting_oracle",
            presence_mismatches == 0 && roc_diff <= 1e-12,
            json{{"max_abs_diff", roc_diff},
                 {"presence_mismatches", presence_mismatches},
                 {"absent_cases", absent_cases},
                 {"vectors", 200}});
  add_check(res, "auprc_matches_threshold_rescan_oracle",
            presence_mismatches == 0 && prc_diff <= 1e-12,
            json{{"max_abs_diff", prc_diff}, {"vectors", 200}});
  return res;
}

// ---------------------------------------------------------------------------
// Intervention-distance oracle: path enumeration.
// ---------------------------------------------------------------------------

namespace {

bool dpath_dfs(const Graph& g, int cur, int target, std::vector<uint8_t>& vis) {
  if (cur == target) return true;
  vis[static_cast<size_t>(cur)] = 1;
  for (int nxt = 0; nxt < g.d; ++nxt) {
    if (!g.edge(cur, nxt) || vis[static_cast<size_t>(nxt)]) continue;
    if (dpath_dfs(g, nxt, target, vis)) {
      vis[static_cast<size_t>(cur)] = 0;
      return true;
    }
  }
  vis[static_cast<size_t>(cur)] = 0;
  return false;
}

bool directed_path_exists(const Graph& g, int a, int b) {
  if (a == b) return false;
  std::vector<uint8_t> vis(static_cast<size_t>(g.d), 0);
  return dpath_dfs(g, a, b, vis);
}

bool path_is_active(const Graph& g, const std::vector<int>& path, const std::vector<uint8_t>& z) {
  for (size_t k = 1; k + 1 < path.size(); ++k) {
    const int prev = path[k - 1], v = path[k], nxt = path[k + 1];
    const bool collider = g.edge(prev, v) && g.edge(nxt, v);
    if (collider) {
      bool open = false;
      for (int w = 0; w < g.d && !open; ++w)
        if (z[static_cast<size_t>(w)] && (w == v || directed_path_exists(g, v, w))) open = true;
      if (!open) return false;
    } else {
      if (z[static_cast<size_t>(v)]) return false;
    }
  }
  return true;
}

bool active_path_dfs(const Graph& g, int target, const std::vector<uint8_t>& z,
                     std::vector<int>& path, std::vector<uint8_t>& onpath) {
  const int cur = path.back();
  if (cur == target) return path_is_active(g, path, z);
  for (int nxt = 0; nxt < g.d; ++nxt) {
    if (onpath[static_cast<size_t>(nxt)]) continue;
    if (!g.edge(cur, nxt) && !g.edge(nxt, cur)) continue;
    path.push_back(nxt);
    onpath[static_cast<size_t>(nxt)] = 1;
    if (active_path_dfs(g, target, z, path, onpath)) return true;
    path.pop_back();
    onpath[static_cast<size_t>(nxt)] = 0;
  }
  return false;
}

bool d_separated_enum(const Graph& g, int x, int y, const std::vector<uint8_t>& z) {
  std::vector<int> path{x};
  std::vector<uint8_t> onpath(static_cast<size_t>(g.d), 0);
  onpath[static_cast<size_t>(x)] = 1;
  return !active_path_dfs(g, y, z, path, onpath);
}

}  // namespace

int64_t sid_oracle(const Graph& g_true, const Graph& g_pred) {
  if (g_true.d != g_pred.d) raise(ErrorKind::invalid_argument, "graph dimension mismatch");
  if (!is_acyclic(g_true) || !is_acyclic(g_pred))
    raise(ErrorKind::invalid_argument, "intervention distance is defined for acyclic graphs");
  const int d = g_true.d;
  int64_t mistakes = 0;
  for (int i = 0; i < d; ++i) {
    std::vector<uint8_t> z(static_cast<size_t>(d), 0);
    for (int p : g_pred.parents(i)) z[static_cast<size_t>(p)] = 1;
    std::vector<uint8_t> de_i(static_cast<size_t>(d), 0);
    for (int w = 0; w < d; ++w) de_i[static_cast<size_t>(w)] = directed_path_exists(g_true, i, w);
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      if (z[static_cast<size_t>(j)]) {
        if (de_i[static_cast<size_t>(j)]) ++mistakes;
        continue;
      }
      // Nodes other than i on some directed i -> ... -> j path.
      std::vector<uint8_t> cn(static_cast<size_t>(d), 0);
      for (int w = 0; w < d; ++w) {
        if (w == i) continue;
        if (de_i[static_cast<size_t>(w)] && (w == j || directed_path_exists(g_true, w, j)))
          cn[static_cast<size_t>(w)] = 1;
      }
      std::vector<uint8_t> forbidden = cn;
      for (int c = 0; c < d; ++c) {
        if (!cn[static_cast<size_t>(c)]) continue;
        for (int w = 0; w < d; ++w)
          if (directed_path_exists(g_true, c, w)) forbidden[static_cast<size_t>(w)] = 1;
      }
      bool bad = false;
      for (int w = 0; w < d && !bad; ++w)
        if (z[static_cast<size_t>(w)] && forbidden[static_cast<size_t>(w)]) bad = true;
      if (bad) {
        ++mistakes;
        continue;
      }
      Graph pbd = g_true;
      for (int c = 0; c < d; ++c)
        if (cn[static_cast<size_t>(c)] && pbd.edge(i, c)) pbd.set_edge(i, c, false);
      if (!d_separated_enum(pbd, i, j, z)) ++mistakes;
    }
  }
  return mistakes;
}

std::vector<Graph> all_dags(int d) {
  if (d < 1 || d > 5) raise(ErrorKind::invalid_argument, "all_dags supports 1 <= d <= 5");
  std::vector<std::pair<int, int>> cells;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j) cells.emplace_back(i, j);
  const int m = static_cast<int>(cells.size());
  std::vector<Graph> out;
  for (uint32_t mask = 0; mask < (1u << m); ++mask) {
    Graph g(d);
    for (int b = 0; b < m; ++b)
      if (mask & (1u << b)) g.set_edge(cells[static_cast<size_t>(b)].first,
                                       cells[static_cast<size_t>(b)].second);
    if (is_acyclic(g)) out.push_back(std::move(g));
  }
  return out;
}

namespace {

Graph random_dag(int d, double p, Rng& rng) {
  std::vector<int> perm = rng.permutation(d);
  Graph g(d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (rng.bernoulli(p))
        g.set_edge(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
  return g;
}

}  // namespace

SuiteResult run_sid_checks(uint64_t seed) {
  SuiteResult res{"sid", true, {}};
  for (int d = 2; d <= 4; ++d) {
    std::vector<Graph> dags = all_dags(d);
    int64_t mismatches = 0, pairs = 0;
    for (const Graph& gt : dags) {
      for (const Graph& gp : dags) {
        ++pairs;
        if (sid(gt, gp) != sid_oracle(gt, gp)) ++mismatches;
      }
    }
    add_check(res, "sid_all_dag_pairs_d" + std::to_string(d), mismatches == 0,
              json{{"dags", dags.size()}, {"pairs", pairs}, {"mismatches", mismatches}});
  }
  {
    Rng rng(mix_seed(seed, hash_tag("sid_random")));
    int64_t mismatches = 0;
    for (int k = 0; k < 200; ++k) {
      Graph gt = random_dag(6, 0.35, rng);
      Graph gp = random_dag(6, 0.35, rng);
      if (sid(gt, gp) != sid_oracle(gt, gp)) ++mismatches;
    }
    add_check(res, "sid_random_pairs_d6", mismatches == 0,
              json{{"pairs", 200}, {"mismatches", mismatches}});
  }
  {
    const int d = 5;
    Graph empty(d);
    Graph complete(d);
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) complete.set_edge(i, j);
    int64_t v = sid(empty, complete);
    int64_t vo = sid_oracle(empty, complete);
    add_check(res, "sid_empty_truth_complete_prediction", v == 0 && vo == 0,
              json{{"sid", v}, {"sid_oracle", vo}});
  }
  return res;
}

// ---------------------------------------------------------------------------
// Simulator ground truths: linear-Gaussian covariance, expression steady
// state, knockout zeros, and interventional mean shifts.
// ---------------------------------------------------------------------------

SuiteResult run_simulation_checks(uint64_t seed) {
  SuiteResult res{"simulation", true, {}};
  Rng base(mix_seed(seed, hash_tag("simulation_checks")));

  {
    const int d = 4;
    Graph g(d);
    g.set_edge(0, 1);
    g.set_edge(1, 2);
    g.set_edge(0, 2);
    g.set_edge(2, 3);
    Mechanisms mechs;
    mechs.f.resize(d);
    mechs.noise.resize(d);
    mechs.f[1].parents = {0};
    mechs.f[1].weights = {1.2};
    mechs.f[2].parents = {0, 1};
    mechs.f[2].weights = {0.7, 0.9};
    mechs.f[3].parents = {2};
    mechs.f[3].weights = {1.1};
    const double sigmas[] = {1.0, 0.8, 0.6, 0.9};
    for (int j = 0; j < d; ++j) mechs.noise[j].sigma = sigmas[j];

    const int64_t n = 100000;
    Rng rng = base.child("covariance");
    Dataset ds = ancestral_sample(g, mechs, InterventionSpec::none(n, d), n, rng);

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);  // A(j,i) = weight of i -> j
    A(1, 0) = 1.2;
    A(2, 0) = 0.7;
    A(2, 1) = 0.9;
    A(3, 2) = 1.1;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(d, d);
    for (int j = 0; j < d; ++j) D(j, j) = sigmas[j] * sigmas[j];
    Eigen::MatrixXd M = (Eigen::MatrixXd::Identity(d, d) - A).inverse();
    Eigen::MatrixXd C = M * D * M.transpose();

    std::vector<double> mean(d, 0.0);
    for (int64_t r = 0; r < n; ++r)
      for (int j = 0; j < d; ++j) mean[static_cast<size_t>(j)] += ds.value(r, j);
    for (auto& m : mean) m /= static_cast<double>(n);
    double max_rel = 0.0;
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        double s = 0.0;
        for (int64_t r = 0; r < n; ++r)
          s += (ds.value(r, a) - mean[static_cast<size_t>(a)]) *
               (ds.value(r, b) - mean[static_cast<size_t>(b)]);
        s /= static_cast<double>(n - 1);
        max_rel = std::max(max_rel, std::abs(s - C(a, b)) / std::abs(C(a, b)));
      }
    }
    add_check(res, "linear_gaussian_covariance", max_rel <= 0.05,
              json{{"max_rel_err", max_rel}, {"samples", n}});
  }

  {
    Graph g(1);
    GrnParams p;
    p.d = 1;
    p.cell_types = 1;
    p.k = {0.0};
    p.gamma = {0.0};
    p.hill_k = {0.0};
    p.b = {2.0};
    p.lambda = {1.0};
    p.zeta = {0.1};
    p.is_mr = {1};
    GrnConfig cfg;
    Rng rng = base.child("steady_state");
    std::vector<double> vals = simulate_clean(g, p, {}, 2000, cfg, rng);
    double m = 0.0;
    for (double v : vals) m += v;
    m /= static_cast<double>(vals.size());
    const double target = p.b[0] / p.lambda[0];
    add_check(res, "expression_steady_state_mean", std::abs(m - target) <= 0.05 * target,
              json{{"mean", m}, {"target", target}, {"cells", 2000}});
  }

  {
    DomainConfig dom = DomainConfig::defaults(DomainKind::grn);
    dom.interventions.probability = 1.0;
    Rng rng = base.child("knockout");
    int64_t masked = 0, zeros = 0;
    for (int t = 0; t < 10; ++t) {
      Task task = build_task(dom, 8, 60, rng);
      for (size_t i = 0; i < task.data.mask.size(); ++i) {
        if (!task.data.mask[i]) continue;
        ++masked;
        if (task.data.values[i] == 0.0) ++zeros;
      }
    }
    double frac = masked > 0 ? static_cast<double>(zeros) / static_cast<double>(masked) : 0.0;
    add_check(res, "knockout_rows_silenced", masked > 0 && frac >= 0.99,
              json{{"masked_entries", masked}, {"zero_fraction", frac}, {"tasks", 10}});
  }

  {
    Graph g(2);
    g.set_edge(0, 1);
    Mechanisms mechs;
    mechs.f.resize(2);
    mechs.noise.resize(2);
    mechs.f[1].parents = {0};
    mechs.f[1].weights = {1.4};
    mechs.noise[0].sigma = 1.0;
    mechs.noise[1].sigma = 0.8;
    const int64_t n = 20000;
    const double a = 2.0, b = -1.0;
    Rng rng = base.child("do_shift");
    auto clamp_run = [&](double value) {
      InterventionSpec iv = InterventionSpec::none(n, 2);
      for (int64_t r = 0; r < n; ++r) {
        iv.mask[static_cast<size_t>(r) * 2] = 1;
        iv.values[static_cast<size_t>(r) * 2] = value;
      }
      return ancestral_sample(g, mechs, iv, n, rng);
    };
    Dataset da = clamp_run(a);
    Dataset db = clamp_run(b);
    auto col_stats = [&](const Dataset& ds) {
      double m = 0.0;
      for (int64_t r = 0; r < n; ++r) m += ds.value(r, 1);
      m /= static_cast<double>(n);
      double v = 0.0;
      for (int64_t r = 0; r < n; ++r) v += (ds.value(r, 1) - m) * (ds.value(r, 1) - m);
      v /= static_cast<double>(n - 1);
      return std::make_pair(m, v);
    };
    auto [ma, va] = col_stats(da);
    auto [mb, vb] = col_stats(db);
    const double diff = ma - mb;
    const double want = 1.4 * (a - b);
    const double se = std::sqrt(va / static_cast<double>(n) + vb / static_cast<double>(n));
    add_check(res, "interventional_mean_shift", std::abs(diff - want) <= 3.0 * se,
              json{{"diff", diff}, {"expected", want}, {"se", se}, {"samples_per_arm", n}});
  }

  return res;
}

// ---------------------------------------------------------------------------
// Reference training run and learned-behavior checks.
// ---------------------------------------------------------------------------

TrainConfig reference_train_config() {
  TrainConfig cfg;
  cfg.domain = DomainConfig::defaults(DomainKind::linear);
  cfg.model.dropout = 0.1;
  cfg.schedule.total_steps = 6000;
  cfg.schedule.batch_max = 8;
  cfg.schedule.d_low = 2;
  cfg.schedule.d_high = 6;
  cfg.schedule.n_choices = {50, 100};
  cfg.schedule.base_lr = 1e-3;
  cfg.schedule.lr_drop_frac = 0.8;
  cfg.schedule.buffer_capacity = 50;
  cfg.schedule.log_every = 10;
  cfg.schedule.checkpoint_every = 2000;
  cfg.seed = 7;
  return cfg;
}

std::string ensure_reference_checkpoint(const std::string& work_dir, int workers) {
  const std::string dir = work_dir + "/reference";
  if (std::filesystem::exists(dir + "/checkpoint.json")) return dir;
  CADET_LOG_INFO("training the reference model (one-time, cached under %s)", dir.c_str());
  TrainConfig cfg = reference_train_config();
  cfg.workers = workers;
  train(cfg, dir);
  return dir;
}

namespace {

struct EvalStats {
  std::vector<double> aurocs, auprcs;
  std::vector<std::optional<double>> auprc_by_task;
  double base_rate = 0.0;       // mean true-edge density
  double cyclic_fraction = 0.0;
};

EvalStats eval_stats(const ParamStore& store, const ModelConfig& model,
                     const std::vector<Task>& tasks) {
  EvalStats st;
  std::vector<EvalReport> reports = evaluate_model_on_tasks(store, model, tasks);
  double dens = 0.0;
  int cyc = 0;
  for (size_t k = 0; k < reports.size(); ++k) {
    const int d = tasks[k].g.d;
    dens += static_cast<double>(tasks[k].g.edge_count()) / (static_cast<double>(d) * (d - 1));
    if (!reports[k].acyclic) ++cyc;
    if (reports[k].auroc) st.aurocs.push_back(*reports[k].auroc);
    if (reports[k].auprc) st.auprcs.push_back(*reports[k].auprc);
    st.auprc_by_task.push_back(reports[k].auprc);
  }
  st.base_rate = dens / static_cast<double>(tasks.size());
  st.cyclic_fraction = static_cast<double>(cyc) / static_cast<double>(tasks.size());
  return st;
}

}  // namespace

SuiteResult run_learning_checks(const std::string& checkpoint_dir, uint64_t seed) {
  SuiteResult res{"learning", true, {}};
  Checkpoint ck = load_checkpoint(checkpoint_dir);
  TrainConfig ref = reference_train_config();
  std::vector<Task> tasks = make_eval_tasks(ref.domain, 5, 100, 50, kEvalSeed, true);

  EvalStats trained = eval_stats(ck.store, ck.model, tasks);
  MeanSe roc = mean_se(trained.aurocs);
  MeanSe prc = mean_se(trained.auprcs);
  add_check(res, "trained_auroc", roc.count > 0 && roc.mean >= 0.80,
            json{{"mean", roc.mean}, {"se", roc.se}, {"tasks", roc.count}});
  add_check(res, "trained_auprc_vs_base_rate",
            prc.count > 0 && prc.mean >= 2.0 * trained.base_rate,
            json{{"mean", prc.mean}, {"se", prc.se}, {"base_rate", trained.base_rate}});

  ParamStore fresh;
  Rng init(mix_seed(seed, hash_tag("untrained")));
  init_params(fresh, ck.model, init);
  EvalStats blank = eval_stats(fresh, ck.model, tasks);
  MeanSe roc0 = mean_se(blank.aurocs);
  add_check(res, "untrained_auroc_near_chance",
            roc0.count > 0 && roc0.mean >= 0.45 && roc0.mean <= 0.55,
            json{{"mean", roc0.mean}, {"se", roc0.se}, {"tasks", roc0.count}});
  return res;
}

SuiteResult run_ood_checks(const std::string& checkpoint_dir, uint64_t /*seed*/) {
  SuiteResult res{"ood", true, {}};
  Checkpoint ck = load_checkpoint(checkpoint_dir);
  DomainConfig dom = reference_train_config().domain;
  dom.ood_graphs = true;
  dom.ood_noise = true;
  std::vector<Task> tasks =
      make_eval_tasks(dom, 5, 100, 50, mix_seed(kEvalSeed, hash_tag("ood")), true);
  EvalStats st = eval_stats(ck.store, ck.model, tasks);
  MeanSe roc = mean_se(st.aurocs);
  add_check(res, "ood_graphs_and_noise_auroc", roc.count > 0 && roc.mean >= 0.65,
            json{{"mean", roc.mean}, {"se", roc.se}, {"tasks", roc.count}});
  return res;
}

SuiteResult run_acyclicity_checks(const std::string& work_dir, uint64_t seed, int workers) {
  SuiteResult res{"acyclicity", true, {}};
  TrainConfig base = reference_train_config();
  base.seed = mix_seed(seed, hash_tag("acyclicity_run"));
  base.workers = workers;
  base.schedule.total_steps = 2000;
  base.schedule.d_low = 5;
  base.schedule.d_high = 5;
  base.schedule.checkpoint_every = 2000;

  TrainConfig cfg_on = base;
  cfg_on.acyclicity.enabled = true;
  TrainConfig cfg_off = base;
  cfg_off.acyclicity.enabled = false;

  const std::string dir_on = work_dir + "/acyclicity_on";
  const std::string dir_off = work_dir + "/acyclicity_off";
  TrainResult r_on = train(cfg_on, dir_on);
  TrainResult r_off = train(cfg_off, dir_off);

  std::vector<Task> tasks =
      make_eval_tasks(base.domain, 5, 100, 100, mix_seed(kEvalSeed, hash_tag("acyclic")), true);
  EvalStats on = eval_stats(r_on.store, base.model, tasks);
  EvalStats off = eval_stats(r_off.store, base.model, tasks);
  add_check(res, "penalty_reduces_cyclic_predictions",
            on.cyclic_fraction <= off.cyclic_fraction + 1e-12,
            json{{"cyclic_fraction_on", on.cyclic_fraction},
                 {"cyclic_fraction_off", off.cyclic_fraction},
                 {"tasks", 100}});

  const int64_t warmup = std::llround(cfg_on.acyclicity.warmup_frac *
                                      static_cast<double>(cfg_on.schedule.total_steps));
  std::ifstream in(dir_on + "/metrics.jsonl");
  if (!in) raise(ErrorKind::io, "cannot read " + dir_on + "/metrics.jsonl");
  std::string line;
  bool have_prev = false, monotone = true;
  int64_t prev_step = 0, considered = 0;
  double prev_lambda = 0.0, prev_f = 0.0, last_lambda = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json row = parse_json(line, "metrics row");
    int64_t step = row.at("step").get<int64_t>();
    double lambda = row.at("lambda").get<double>();
    double f_ema = row.at("F_ema").get<double>();
    if (have_prev && prev_step > warmup && prev_f > 0.0) {
      ++considered;
      if (lambda < prev_lambda - 1e-12) monotone = false;
    }
    have_prev = true;
    prev_step = step;
    prev_lambda = lambda;
    prev_f = f_ema;
    last_lambda = lambda;
  }
  add_check(res, "multiplier_monotone_while_penalty_positive", monotone && considered > 0,
            json{{"rows_considered", considered},
                 {"final_lambda", last_lambda},
                 {"warmup_steps", warmup}});
  return res;
}

SuiteResult run_size_generalization_checks(const std::string& checkpoint_dir, uint64_t /*seed*/) {
  SuiteResult res{"size_generalization", true, {}};
  Checkpoint ck = load_checkpoint(checkpoint_dir);
  DomainConfig dom = reference_train_config().domain;
  const int ds[] = {5, 10, 15};
  std::map<int, EvalStats> stats;
  for (int d : ds) {
    std::vector<Task> tasks =
        make_eval_tasks(dom, d, 100, 50, mix_seed(kEvalSeed, static_cast<uint64_t>(d)), true);
    stats[d] = eval_stats(ck.store, ck.model, tasks);
  }
  auto paired = [&](int d1, int d2) {
    std::vector<double> diffs;
    const auto& a = stats[d1].auprc_by_task;
    const auto& b = stats[d2].auprc_by_task;
    for (size_t k = 0; k < std::min(a.size(), b.size()); ++k)
      if (a[k] && b[k]) diffs.push_back(*a[k] - *b[k]);
    return mean_se(diffs);
  };
  for (auto [d1, d2] : {std::pair<int, int>{5, 10}, {10, 15}}) {
    MeanSe m = paired(d1, d2);
    add_check(res, "auprc_non_increasing_d" + std::to_string(d1) + "_to_d" + std::to_string(d2),
              m.count > 0 && m.mean >= -m.se,
              json{{"mean_paired_diff", m.mean}, {"se", m.se}, {"pairs", m.count}});
  }
  MeanSe m15 = mean_se(stats[15].auprcs);
  add_check(res, "auprc_above_base_rate_d15", m15.count > 0 && m15.mean > stats[15].base_rate,
            json{{"mean", m15.mean}, {"se", m15.se}, {"base_rate", stats[15].base_rate}});
  return res;
}

// ---------------------------------------------------------------------------
// Suite dispatch.
// ---------------------------------------------------------------------------

json suite_result_to_json(const SuiteResult& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back(json{{"name", c.name}, {"pass", c.pass}, {"details", c.details}});
  return json{{"suite", r.suite}, {"pass", r.pass}, {"checks", checks}};
}

std::vector<std::string> suite_names() {
  return {"invariance", "gradients", "oracles", "learning", "acyclicity", "size_generalization"};
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& opt) {
  if (name == "gradients") return run_gradient_checks(opt.seed);
  if (name == "invariance") return run_invariance_checks(opt.checkpoint, opt.seed);
  if (name == "oracles") {
    SuiteResult res{"oracles", true, {}};
    absorb(res, run_spectral_checks(opt.seed));
    absorb(res, run_ranking_checks(opt.seed));
    absorb(res, run_sid_checks(opt.seed));
    absorb(res, run_simulation_checks(opt.seed));
    return res;
  }
  if (name == "learning") {
    const std::string ckpt = opt.checkpoint.empty()
                                 ? ensure_reference_checkpoint(opt.work_dir, opt.workers)
                                 : opt.checkpoint;
    SuiteResult res{"learning", true, {}};
    absorb(res, run_learning_checks(ckpt, opt.seed));
    absorb(res, run_ood_checks(ckpt, opt.seed));
    return res;
  }
  if (name == "acyclicity") return run_acyclicity_checks(opt.work_dir, opt.seed, opt.workers);
  if (name == "size_generalization") {
    const std::string ckpt = opt.checkpoint.empty()
                                 ? ensure_reference_checkpoint(opt.work_dir, opt.workers)
                                 : opt.checkpoint;
    return run_size_generalization_checks(ckpt, opt.seed);
  }
  raise(ErrorKind::invalid_argument, "unknown suite: " + name);
}

}  // namespace cadet
