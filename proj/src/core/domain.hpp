#pragma once

#include <string>
#include <vector>

#include "core/graph.hpp"
#include "core/json_util.hpp"

namespace cadet {

// n x d observations plus the intervention-indicator mask (o_j = (x_j, u_j)).
struct Dataset {
  int64_t n = 0;
  int d = 0;
  std::vector<double> values;  // n*d row-major
  std::vector<uint8_t> mask;   // n*d

  Dataset() = default;
  Dataset(int64_t n_, int d_)
      : n(n_),
        d(d_),
        values(static_cast<size_t>(n_) * static_cast<size_t>(d_), 0.0),
        mask(static_cast<size_t>(n_) * static_cast<size_t>(d_), 0) {}

  double& value(int64_t r, int j) { return values[static_cast<size_t>(r) * d + j]; }
  double value(int64_t r, int j) const { return values[static_cast<size_t>(r) * d + j]; }
  uint8_t& mask_at(int64_t r, int j) { return mask[static_cast<size_t>(r) * d + j]; }
  uint8_t mask_at(int64_t r, int j) const { return mask[static_cast<size_t>(r) * d + j]; }
};

// Per-sample intervention targets and clamp values (values meaningful only
// where mask is set).
struct InterventionSpec {
  std::vector<uint8_t> mask;    // n*d
  std::vector<double> values;   // n*d

  static InterventionSpec none(int64_t n, int d) {
    InterventionSpec s;
    s.mask.assign(static_cast<size_t>(n) * static_cast<size_t>(d), 0);
    s.values.assign(static_cast<size_t>(n) * static_cast<size_t>(d), 0.0);
    return s;
  }
};

// One training/evaluation example: a ground-truth structure with a dataset
// drawn from it. `seed` identifies the generation sub-stream (diagnostics,
// buffer serialization).
struct Task {
  Graph g;
  Dataset data;
  uint64_t seed = 0;
};

enum class DomainKind { linear, rff, grn };
DomainKind domain_kind_from_string(const std::string& s);
std::string domain_kind_to_string(DomainKind k);

enum class NoiseFamily { gaussian, cauchy, laplace };
NoiseFamily noise_family_from_string(const std::string& s);
std::string noise_family_to_string(NoiseFamily f);

struct MechanismRanges {
  double weight_low = 0.5, weight_high = 2.0;  // |w| range; sign is a fair coin
  double bias_low = -1.0, bias_high = 1.0;
  int rff_features = 100;
  double length_scale_low = 1.0, length_scale_high = 3.0;
  double output_scale_low = 1.0, output_scale_high = 2.0;
};

struct NoiseConfig {
  NoiseFamily family = NoiseFamily::gaussian;
  double scale_low = 0.5, scale_high = 1.0;
  bool heteroscedastic = false;
};

struct InterventionConfig {
  double probability = 0.5;  // per dataset: second half of rows interventional
  double value_low = -3.0, value_high = 3.0;
};

struct TechNoiseParams {
  double p_outlier = 0.05;
  double mu_outlier = 1.0, sigma_outlier = 0.5;
  double mu_lib = 8.5, sigma_lib = 0.35;  // log-normal library totals
  double delta = 40.0, tau = 8.0;         // dropout percentile and temperature
};
TechNoiseParams tech_noise_preset(const std::string& name);

struct GrnConfig {
  int cell_types_low = 5, cell_types_high = 10;
  double b_low = 1.0, b_high = 3.0;        // MR production rates (per cell type)
  double k_low = 1.0, k_high = 5.0;        // interaction magnitudes
  double gamma_low = 1.0, gamma_high = 3.0;
  double hill_k_low = 0.5, hill_k_high = 2.0;
  double lambda_low = 0.5, lambda_high = 1.5;
  double zeta_low = 0.05, zeta_high = 0.2;
  double polarity_alpha = 0.2588, polarity_beta = 0.2499;
  double dt = 0.01;
  int burn_in = 1000;
  int stride_min = 10, stride_jitter = 10;
  double state_cap = 1e6;
  std::vector<std::string> tech_noise_presets{"umi_low", "umi_medium"};
  std::vector<std::string> tech_noise_presets_ood{"umi_noisy"};
};

// Full specification of a data-generating distribution p(G, D), including the
// o.o.d. shift switches (each switch swaps in the *_ood counterpart).
struct DomainConfig {
  DomainKind kind = DomainKind::linear;
  bool standardize = false;
  bool ood_graphs = false;
  bool ood_mechanisms = false;
  bool ood_noise = false;
  GraphModelConfig graph;
  GraphModelConfig graph_ood;
  MechanismRanges mechanism;
  MechanismRanges mechanism_ood;
  NoiseConfig noise;
  NoiseConfig noise_ood;
  InterventionConfig interventions;
  GrnConfig grn;

  static DomainConfig defaults(DomainKind kind);
  const GraphModelConfig& active_graph() const { return ood_graphs ? graph_ood : graph; }
  const MechanismRanges& active_mechanism() const {
    return ood_mechanisms ? mechanism_ood : mechanism;
  }
  const NoiseConfig& active_noise() const { return ood_noise ? noise_ood : noise; }
};

DomainConfig domain_from_json(const json& j);
json domain_to_json(const DomainConfig& c);
json graph_model_to_json(const GraphModelConfig& c);
GraphModelConfig graph_model_from_json(const json& j, const GraphModelConfig& base);

}  // namespace cadet
