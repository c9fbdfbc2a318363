#pragma once

#include "core/domain.hpp"

namespace cadet {

// Kinetic parameters of the regulatory-network simulator.
struct GrnParams {
  int d = 0;
  int cell_types = 1;
  std::vector<double> k;       // d*d signed interaction strengths, k[i*d+j] for edge i->j
  std::vector<double> gamma;   // d*d Hill coefficients (per edge)
  std::vector<double> hill_k;  // d*d Hill half-response thresholds (per edge)
  std::vector<double> b;       // d*cell_types master-regulator production rates
  std::vector<double> lambda;  // per-gene decay
  std::vector<double> zeta;    // per-gene process-noise scale
  std::vector<uint8_t> is_mr;  // derived: node has no parents
};

GrnParams sample_grn_params(const Graph& g, const GrnConfig& cfg, int cell_types, Rng& rng);

// Steady-state snapshots of the chemical-Langevin dynamics; `knocked[j]` forces
// the production rate of gene j to zero for every cell. Cells are split evenly
// across cell types. Returns an n*d row-major matrix of clean expression.
std::vector<double> simulate_clean(const Graph& g, const GrnParams& params,
                                   const std::vector<uint8_t>& knocked, int64_t n,
                                   const GrnConfig& cfg, Rng& rng);

struct CountMatrix {
  int64_t n = 0;
  int d = 0;
  std::vector<double> counts;      // integer-valued UMI counts
  std::vector<double> normalized;  // after standardize_counts
  bool warning = false;            // all-zero matrix during standardization
};

// Four-stage technical noise: outlier genes, library-size scaling,
// rank-percentile dropout, Poisson UMI sampling.
CountMatrix apply_technical_noise(const std::vector<double>& clean, int64_t n, int d,
                                  const TechNoiseParams& tn, Rng& rng);

// Counts-per-million per row, then divide by the median of non-zero entries.
void standardize_counts(CountMatrix& cm);

Task build_grn_task(const DomainConfig& domain, int d, int64_t n, Rng& rng);

}  // namespace cadet
