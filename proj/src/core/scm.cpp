#include "core/scm.hpp"

#include <cmath>

#include "core/grn.hpp"

namespace cadet {

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double draw_noise(NoiseFamily family, double sigma, Rng& rng) {
  switch (family) {
    case NoiseFamily::gaussian: return sigma * rng.normal();
    case NoiseFamily::cauchy: return rng.cauchy(sigma);
    case NoiseFamily::laplace: return rng.laplace(sigma);
  }
  raise(ErrorKind::internal, "bad noise family");
}

double signed_uniform(double lo, double hi, Rng& rng) {
  double mag = rng.uniform(lo, hi);
  return rng.bernoulli(0.5) ? mag : -mag;
}

}  // namespace

double eval_rff(const Mechanism& mech, const std::vector<double>& x_parents) {
  if (mech.kind != Mechanism::Kind::rff) {
    raise(ErrorKind::invalid_argument, "eval_rff: mechanism is not rff");
  }
  const size_t p = mech.parents.size();
  if (x_parents.size() != p) {
    raise(ErrorKind::invalid_argument, "eval_rff: parent-value count mismatch");
  }
  double acc = 0.0;
  for (int k = 0; k < mech.m; ++k) {
    double dot = mech.phases[static_cast<size_t>(k)];
    for (size_t t = 0; t < p; ++t) {
      dot += mech.omega[static_cast<size_t>(k) * p + t] * x_parents[t];
    }
    acc += std::cos(dot);
  }
  return mech.bias + mech.c * std::sqrt(2.0 / static_cast<double>(mech.m)) * acc;
}

double eval_mechanism(const Mechanism& mech, const double* row) {
  if (mech.kind == Mechanism::Kind::linear) {
    double acc = mech.bias;
    for (size_t t = 0; t < mech.parents.size(); ++t) {
      acc += mech.weights[t] * row[mech.parents[t]];
    }
    return acc;
  }
  std::vector<double> x(mech.parents.size());
  for (size_t t = 0; t < mech.parents.size(); ++t) x[t] = row[mech.parents[t]];
  return eval_rff(mech, x);
}

double eval_noise_scale(const NodeNoise& noise, const double* row) {
  if (!noise.heteroscedastic) return 1.0;
  return softplus(eval_mechanism(noise.h_raw, row)) + 0.1;
}

Mechanism sample_rff_mechanism(const std::vector<int>& parents, const MechanismRanges& r,
                               Rng& rng) {
  Mechanism mech;
  mech.kind = Mechanism::Kind::rff;
  mech.parents = parents;
  mech.m = r.rff_features;
  if (mech.m < 1) raise(ErrorKind::invalid_argument, "rff_features must be >= 1");
  mech.ell = rng.uniform(r.length_scale_low, r.length_scale_high);
  mech.c = rng.uniform(r.output_scale_low, r.output_scale_high);
  mech.bias = rng.uniform(r.bias_low, r.bias_high);
  mech.omega.resize(static_cast<size_t>(mech.m) * parents.size());
  for (double& w : mech.omega) w = rng.normal() / mech.ell;  // omega ~ N(0, 1/ell^2)
  mech.phases.resize(static_cast<size_t>(mech.m));
  for (double& ph : mech.phases) ph = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  return mech;
}

Mechanisms sample_mechanisms(const Graph& g, const DomainConfig& domain, Rng& rng) {
  if (!is_acyclic(g)) {
    raise(ErrorKind::invalid_argument, "sample_mechanisms: graph must be acyclic for SCM domains");
  }
  const MechanismRanges& r = domain.active_mechanism();
  const NoiseConfig& nz = domain.active_noise();
  Mechanisms out;
  out.f.reserve(static_cast<size_t>(g.d));
  out.noise.reserve(static_cast<size_t>(g.d));
  for (int j = 0; j < g.d; ++j) {
    std::vector<int> parents = g.parents(j);
    if (domain.kind == DomainKind::rff) {
      out.f.push_back(sample_rff_mechanism(parents, r, rng));
    } else {
      Mechanism mech;
      mech.kind = Mechanism::Kind::linear;
      mech.parents = parents;
      mech.weights.resize(parents.size());
      for (double& w : mech.weights) w = signed_uniform(r.weight_low, r.weight_high, rng);
      mech.bias = rng.uniform(r.bias_low, r.bias_high);
      out.f.push_back(std::move(mech));
    }
    NodeNoise noise;
    noise.family = nz.family;
    noise.sigma = rng.uniform(nz.scale_low, nz.scale_high);
    noise.heteroscedastic = nz.heteroscedastic;
    if (noise.heteroscedastic) {
      noise.h_raw = sample_rff_mechanism(out.f.back().parents, r, rng);
    }
    out.noise.push_back(std::move(noise));
  }
  return out;
}

Dataset ancestral_sample(const Graph& g, const Mechanisms& mechs, const InterventionSpec& iv,
                         int64_t n, Rng& rng) {
  if (static_cast<int>(mechs.f.size()) != g.d) {
    raise(ErrorKind::invalid_argument, "ancestral_sample: mechanism count != d");
  }
  const std::vector<int> order = topo_order(g);
  Dataset out(n, g.d);
  std::vector<double> row(static_cast<size_t>(g.d));
  for (int64_t r = 0; r < n; ++r) {
    int attempts = 0;
    for (;;) {
      bool finite = true;
      for (int j : order) {
        double x;
        if (iv.mask[static_cast<size_t>(r) * g.d + j]) {
          x = iv.values[static_cast<size_t>(r) * g.d + j];
        } else {
          const double f = eval_mechanism(mechs.f[static_cast<size_t>(j)], row.data());
          const double h = eval_noise_scale(mechs.noise[static_cast<size_t>(j)], row.data());
          const double eps = draw_noise(mechs.noise[static_cast<size_t>(j)].family,
                                        mechs.noise[static_cast<size_t>(j)].sigma, rng);
          x = f + h * eps;
        }
        row[static_cast<size_t>(j)] = x;
        if (!std::isfinite(x)) {
          finite = false;
          break;
        }
      }
      if (finite) break;
      if (++attempts > 100) {
        raise(ErrorKind::numeric, "ancestral_sample: non-finite sample persisted after 100 retries");
      }
    }
    for (int j = 0; j < g.d; ++j) {
      out.value(r, j) = row[static_cast<size_t>(j)];
      out.mask_at(r, j) = iv.mask[static_cast<size_t>(r) * g.d + j];
    }
  }
  return out;
}

void standardize_columns(Dataset& data) {
  for (int j = 0; j < data.d; ++j) {
    double mean = 0.0;
    for (int64_t r = 0; r < data.n; ++r) mean += data.value(r, j);
    mean /= static_cast<double>(data.n);
    double var = 0.0;
    for (int64_t r = 0; r < data.n; ++r) {
      double c = data.value(r, j) - mean;
      var += c * c;
    }
    var /= static_cast<double>(data.n);
    const double sd = std::sqrt(var);
    for (int64_t r = 0; r < data.n; ++r) {
      data.value(r, j) = sd > 0 ? (data.value(r, j) - mean) / sd : data.value(r, j) - mean;
    }
  }
}

Task build_scm_task(const Graph& g, const DomainConfig& domain, int64_t n, Rng& rng) {
  if (n < 2) raise(ErrorKind::invalid_argument, "build_task: n must be >= 2");
  Mechanisms mechs = sample_mechanisms(g, domain, rng);
  InterventionSpec iv = InterventionSpec::none(n, g.d);
  if (rng.bernoulli(domain.interventions.probability)) {
    // Targets drawn from a random subset containing 50% of the nodes; the
    // second half of rows get exactly one clamped node each.
    const int subset_size = (g.d + 1) / 2;
    std::vector<int> nodes = rng.permutation(g.d);
    nodes.resize(static_cast<size_t>(subset_size));
    const int64_t start = n - n / 2;
    for (int64_t r = start; r < n; ++r) {
      const int target = nodes[static_cast<size_t>(rng.uniform_int(subset_size))];
      iv.mask[static_cast<size_t>(r) * g.d + target] = 1;
      iv.values[static_cast<size_t>(r) * g.d + target] =
          rng.uniform(domain.interventions.value_low, domain.interventions.value_high);
    }
  }
  Task task;
  task.g = g;
  task.seed = rng.seed();
  task.data = ancestral_sample(g, mechs, iv, n, rng);
  if (domain.standardize) standardize_columns(task.data);
  return task;
}

Task build_task(const DomainConfig& domain, int d, int64_t n, Rng& rng) {
  if (domain.kind == DomainKind::grn) return build_grn_task(domain, d, n, rng);
  Graph g = sample_graph(domain.active_graph(), d, rng);
  return build_scm_task(g, domain, n, rng);
}

}  // namespace cadet
