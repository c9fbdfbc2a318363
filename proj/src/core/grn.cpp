#include "core/grn.hpp"

#include <algorithm>
#include <cmath>

namespace cadet {

GrnParams sample_grn_params(const Graph& g, const GrnConfig& cfg, int cell_types, Rng& rng) {
  if (!is_acyclic(g)) raise(ErrorKind::invalid_argument, "grn params require an acyclic graph");
  if (cell_types < 1) raise(ErrorKind::invalid_argument, "cell_types must be >= 1");
  const int d = g.d;
  GrnParams p;
  p.d = d;
  p.cell_types = cell_types;
  p.k.assign(static_cast<size_t>(d) * d, 0.0);
  p.gamma.assign(static_cast<size_t>(d) * d, 0.0);
  p.hill_k.assign(static_cast<size_t>(d) * d, 0.0);
  p.b.assign(static_cast<size_t>(d) * cell_types, 0.0);
  p.lambda.resize(d);
  p.zeta.resize(d);
  p.is_mr.assign(d, 0);

  // Per-gene regulation polarity: probability that the gene's outgoing
  // regulations are activating.
  std::vector<double> polarity(d);
  for (int i = 0; i < d; ++i) polarity[i] = rng.beta(cfg.polarity_alpha, cfg.polarity_beta);

  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (!g.edge(i, j)) continue;
      double mag = rng.uniform(cfg.k_low, cfg.k_high);
      double sign = rng.bernoulli(polarity[i]) ? 1.0 : -1.0;
      p.k[static_cast<size_t>(i) * d + j] = sign * mag;
      p.gamma[static_cast<size_t>(i) * d + j] = rng.uniform(cfg.gamma_low, cfg.gamma_high);
      p.hill_k[static_cast<size_t>(i) * d + j] = rng.uniform(cfg.hill_k_low, cfg.hill_k_high);
    }
  }
  for (int j = 0; j < d; ++j) {
    bool has_parent = false;
    for (int i = 0; i < d; ++i)
      if (g.edge(i, j)) has_parent = true;
    p.is_mr[j] = has_parent ? 0 : 1;
  }
  for (int j = 0; j < d; ++j) {
    if (!p.is_mr[j]) continue;
    for (int t = 0; t < cell_types; ++t)
      p.b[static_cast<size_t>(j) * cell_types + t] = rng.uniform(cfg.b_low, cfg.b_high);
  }
  for (int j = 0; j < d; ++j) p.lambda[j] = rng.uniform(cfg.lambda_low, cfg.lambda_high);
  for (int j = 0; j < d; ++j) p.zeta[j] = rng.uniform(cfg.zeta_low, cfg.zeta_high);
  return p;
}

namespace {

double hill(double x, double gamma, double kk) {
  if (x <= 0.0) return 0.0;
  double num = std::pow(x, gamma);
  double den = num + std::pow(kk, gamma);
  if (den <= 0.0) return 0.0;
  return num / den;
}

double production(const Graph& g, const GrnParams& p, const std::vector<double>& x, int j,
                  int type, const std::vector<uint8_t>& knocked) {
  if (!knocked.empty() && knocked[j]) return 0.0;
  const int d = p.d;
  if (p.is_mr[j]) return p.b[static_cast<size_t>(j) * p.cell_types + type];
  double prod = 0.0;
  for (int i = 0; i < d; ++i) {
    if (!g.edge(i, j)) continue;
    size_t e = static_cast<size_t>(i) * d + j;
    double h = hill(x[i], p.gamma[e], p.hill_k[e]);
    double k = p.k[e];
    if (k >= 0.0)
      prod += k * h;
    else
      prod += (-k) * (1.0 - h);
  }
  return prod;
}

// One trajectory for a single cell type; returns `cells` snapshots taken after
// burn-in, spaced by a jittered stride. Diverging states trigger one retry at
// a tenth of the step size (with proportionally more steps).
bool run_trajectory(const Graph& g, const GrnParams& p, const std::vector<uint8_t>& knocked,
                    int type, int64_t cells, const GrnConfig& cfg, double dt, int64_t step_scale,
                    Rng& rng, std::vector<std::vector<double>>& out) {
  const int d = p.d;
  std::vector<double> x(d, 0.0), prod(d, 0.0);
  const double sqrt_dt = std::sqrt(dt);
  int64_t burn = static_cast<int64_t>(cfg.burn_in) * step_scale;
  out.clear();
  out.reserve(static_cast<size_t>(cells));
  int64_t remaining_until_snapshot = burn;
  int64_t taken = 0;
  while (taken < cells) {
    for (int64_t s = 0; s < remaining_until_snapshot; ++s) {
      for (int j = 0; j < d; ++j) prod[j] = production(g, p, x, j, type, knocked);
      for (int j = 0; j < d; ++j) {
        double drift = (prod[j] - p.lambda[j] * x[j]) * dt;
        double z1 = rng.normal();
        double z2 = rng.normal();
        double diff = p.zeta[j] * (std::sqrt(std::max(prod[j], 0.0)) * sqrt_dt * z1 +
                                   std::sqrt(p.lambda[j] * std::max(x[j], 0.0)) * sqrt_dt * z2);
        x[j] += drift + diff;
        if (x[j] < 0.0) x[j] = 0.0;
        if (!std::isfinite(x[j]) || x[j] > cfg.state_cap) return false;
      }
    }
    out.push_back(x);
    ++taken;
    int64_t stride = cfg.stride_min + rng.uniform_int(cfg.stride_jitter + 1);
    remaining_until_snapshot = stride * step_scale;
  }
  return true;
}

}  // namespace

std::vector<double> simulate_clean(const Graph& g, const GrnParams& params,
                                   const std::vector<uint8_t>& knocked, int64_t n,
                                   const GrnConfig& cfg, Rng& rng) {
  const int d = params.d;
  if (g.d != d) raise(ErrorKind::invalid_argument, "graph/params dimension mismatch");
  if (n < 1) raise(ErrorKind::invalid_argument, "need at least one cell");
  if (!knocked.empty() && static_cast<int>(knocked.size()) != d)
    raise(ErrorKind::invalid_argument, "knockout mask size mismatch");
  const int c = params.cell_types;
  std::vector<double> values(static_cast<size_t>(n) * d, 0.0);
  int64_t row = 0;
  for (int type = 0; type < c; ++type) {
    int64_t cells = n / c + (type < static_cast<int>(n % c) ? 1 : 0);
    if (cells == 0) continue;
    std::vector<std::vector<double>> snaps;
    if (!run_trajectory(g, params, knocked, type, cells, cfg, cfg.dt, 1, rng, snaps)) {
      CADET_LOG_WARN("expression trajectory diverged; retrying with dt/10");
      if (!run_trajectory(g, params, knocked, type, cells, cfg, cfg.dt * 0.1, 10, rng, snaps))
        raise(ErrorKind::numeric, "expression dynamics diverged even at reduced step size");
    }
    for (const auto& snap : snaps) {
      for (int j = 0; j < d; ++j) values[static_cast<size_t>(row) * d + j] = snap[j];
      ++row;
    }
  }
  return values;
}

CountMatrix apply_technical_noise(const std::vector<double>& clean, int64_t n, int d,
                                  const TechNoiseParams& tn, Rng& rng) {
  if (static_cast<int64_t>(clean.size()) != n * d)
    raise(ErrorKind::invalid_argument, "clean matrix size mismatch");
  CountMatrix cm;
  cm.n = n;
  cm.d = d;
  cm.counts = clean;
  auto& v = cm.counts;

  // Stage 1: outlier genes get a log-normal expression multiplier.
  for (int j = 0; j < d; ++j) {
    if (!rng.bernoulli(tn.p_outlier)) continue;
    double mult = rng.lognormal(tn.mu_outlier, tn.sigma_outlier);
    for (int64_t i = 0; i < n; ++i) v[static_cast<size_t>(i) * d + j] *= mult;
  }

  // Stage 2: per-cell library size; rows are rescaled to a log-normal total.
  for (int64_t i = 0; i < n; ++i) {
    double lib = rng.lognormal(tn.mu_lib, tn.sigma_lib);
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += v[static_cast<size_t>(i) * d + j];
    if (s > 0.0) {
      double f = lib / s;
      for (int j = 0; j < d; ++j) v[static_cast<size_t>(i) * d + j] *= f;
    }
  }

  // Stage 3: dropout. Each entry's within-cell rank percentile q is pushed
  // through a logistic gate centred on the cell's delta-th percentile; low
  // expression is dropped with high probability. delta <= 0 places the centre
  // below every rank so the gate passes all entries as tau -> 0.
  std::vector<double> q(d), qs(d);
  for (int64_t i = 0; i < n; ++i) {
    const double* rowv = &v[static_cast<size_t>(i) * d];
    for (int j = 0; j < d; ++j) {
      int less = 0, equal = 0;
      for (int l = 0; l < d; ++l) {
        if (l == j) continue;
        if (rowv[l] < rowv[j]) ++less;
        else if (rowv[l] == rowv[j]) ++equal;
      }
      q[j] = d > 1 ? 100.0 * (less + 0.5 * equal) / (d - 1) : 100.0;
    }
    double q_delta;
    if (tn.delta <= 0.0) {
      q_delta = -1.0;
    } else {
      qs = q;
      std::sort(qs.begin(), qs.end());
      int idx = static_cast<int>(std::ceil(tn.delta / 100.0 * d)) - 1;
      idx = std::clamp(idx, 0, d - 1);
      q_delta = qs[idx];
    }
    for (int j = 0; j < d; ++j) {
      double z = (q[j] - q_delta) / tn.tau;
      double keep = 1.0 / (1.0 + std::exp(-z));
      if (!rng.bernoulli(keep)) v[static_cast<size_t>(i) * d + j] = 0.0;
    }
  }

  // Stage 4: Poisson UMI counts (zero entries stay zero without a draw).
  for (auto& e : v) {
    if (e > 0.0)
      e = static_cast<double>(rng.poisson(e));
    else
      e = 0.0;
  }
  cm.normalized = cm.counts;
  return cm;
}

void standardize_counts(CountMatrix& cm) {
  cm.normalized = cm.counts;
  auto& v = cm.normalized;
  bool any = false;
  for (double e : v)
    if (e != 0.0) any = true;
  if (!any) {
    cm.warning = true;
    CADET_LOG_WARN("all-zero count matrix; skipping normalization");
    return;
  }
  for (int64_t i = 0; i < cm.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < cm.d; ++j) s += v[static_cast<size_t>(i) * cm.d + j];
    if (s > 0.0) {
      double f = 1e6 / s;
      for (int j = 0; j < cm.d; ++j) v[static_cast<size_t>(i) * cm.d + j] *= f;
    }
  }
  std::vector<double> nz;
  nz.reserve(v.size());
  for (double e : v)
    if (e != 0.0) nz.push_back(e);
  std::sort(nz.begin(), nz.end());
  size_t m = nz.size();
  double med = (m % 2 == 1) ? nz[m / 2] : 0.5 * (nz[m / 2 - 1] + nz[m / 2]);
  if (med > 0.0)
    for (double& e : v) e /= med;
}

Task build_grn_task(const DomainConfig& domain, int d, int64_t n, Rng& rng) {
  if (d < 1) raise(ErrorKind::invalid_argument, "need at least one gene");
  if (n < 2) raise(ErrorKind::invalid_argument, "need at least two cells");
  const GraphModelConfig& gcfg = domain.active_graph();
  Graph g;
  bool ok = false;
  for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
    g = sample_graph(gcfg, d, rng);
    ok = (g.d == d);
  }
  if (!ok) raise(ErrorKind::internal, "could not extract a subgraph of the requested size");

  const GrnConfig& gc = domain.grn;
  int cell_types = gc.cell_types_low +
                   static_cast<int>(rng.uniform_int(gc.cell_types_high - gc.cell_types_low + 1));
  GrnParams params = sample_grn_params(g, gc, cell_types, rng);

  bool interventional = rng.bernoulli(domain.interventions.probability);
  std::vector<double> clean(static_cast<size_t>(n) * d, 0.0);
  std::vector<uint8_t> mask(static_cast<size_t>(n) * d, 0);
  if (!interventional) {
    clean = simulate_clean(g, params, {}, n, gc, rng);
  } else {
    int64_t n_ko = n / 2;
    int64_t n_obs = n - n_ko;
    std::vector<double> obs = simulate_clean(g, params, {}, n_obs, gc, rng);
    std::copy(obs.begin(), obs.end(), clean.begin());
    int64_t row = n_obs;
    for (int gene = 0; gene < d; ++gene) {
      int64_t cells = n_ko / d + (gene < static_cast<int>(n_ko % d) ? 1 : 0);
      if (cells == 0) continue;
      std::vector<uint8_t> knocked(d, 0);
      knocked[gene] = 1;
      std::vector<double> ko = simulate_clean(g, params, knocked, cells, gc, rng);
      for (int64_t r = 0; r < cells; ++r) {
        for (int j = 0; j < d; ++j)
          clean[static_cast<size_t>(row + r) * d + j] = ko[static_cast<size_t>(r) * d + j];
        mask[static_cast<size_t>(row + r) * d + gene] = 1;
      }
      row += cells;
    }
  }

  const auto& presets = domain.ood_noise ? gc.tech_noise_presets_ood : gc.tech_noise_presets;
  if (presets.empty()) raise(ErrorKind::invalid_argument, "no technical-noise presets configured");
  const std::string& preset = presets[static_cast<size_t>(
      rng.uniform_int(static_cast<int64_t>(presets.size())))];
  TechNoiseParams tn = tech_noise_preset(preset);
  CountMatrix cm = apply_technical_noise(clean, n, d, tn, rng);
  standardize_counts(cm);

  Task task;
  task.g = g;
  task.data.n = n;
  task.data.d = d;
  task.data.values = std::move(cm.normalized);
  task.data.mask = std::move(mask);
  task.seed = rng.seed();
  return task;
}

}  // namespace cadet
