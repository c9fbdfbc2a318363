#pragma once

#include "core/domain.hpp"

namespace cadet {

// Structural equation for one node: linear affine or random-Fourier-feature
// draw from a squared-exponential GP prior.
struct Mechanism {
  enum class Kind { linear, rff } kind = Kind::linear;
  std::vector<int> parents;  // ascending node indices
  // linear
  std::vector<double> weights;
  double bias = 0.0;
  // rff: f(x) = bias + c * sqrt(2/m) * sum_k cos(omega_k . x + phase_k)
  int m = 0;
  std::vector<double> omega;   // m * parents.size(), row-major per feature
  std::vector<double> phases;  // m
  double c = 1.0;
  double ell = 1.0;
};

struct NodeNoise {
  NoiseFamily family = NoiseFamily::gaussian;
  double sigma = 1.0;
  bool heteroscedastic = false;
  Mechanism h_raw;  // rff inside softplus(.) + 0.1 when heteroscedastic
};

struct Mechanisms {
  std::vector<Mechanism> f;
  std::vector<NodeNoise> noise;
};

double eval_rff(const Mechanism& mech, const std::vector<double>& x_parents);
double eval_mechanism(const Mechanism& mech, const double* row);
// Positive noise-scale function h_j(x_pa) = softplus(rff) + 0.1.
double eval_noise_scale(const NodeNoise& noise, const double* row);

Mechanism sample_rff_mechanism(const std::vector<int>& parents, const MechanismRanges& r,
                               Rng& rng);
Mechanisms sample_mechanisms(const Graph& g, const DomainConfig& domain, Rng& rng);

Dataset ancestral_sample(const Graph& g, const Mechanisms& mechs, const InterventionSpec& iv,
                         int64_t n, Rng& rng);

// Per-dataset z-standardization of columns (mask untouched). Constant columns
// are centered but not scaled.
void standardize_columns(Dataset& data);

// With domain-configured probability the second half of rows are single-node
// interventions on a random 50% node subset.
Task build_scm_task(const Graph& g, const DomainConfig& domain, int64_t n, Rng& rng);

// Samples the graph, then builds the dataset; dispatches to the GRN builder
// for DomainKind::grn.
Task build_task(const DomainConfig& domain, int d, int64_t n, Rng& rng);

}  // namespace cadet
