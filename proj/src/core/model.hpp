#pragma once

#include <map>
#include <string>

#include "core/domain.hpp"
#include "core/json_util.hpp"
#include "core/optim.hpp"
#include "core/tape.hpp"

namespace cadet {

// Architecture hyperparameters of the amortized posterior network.
struct ModelConfig {
  int layers = 2;     // encoder blocks; each attends over both data axes
  int dim = 64;       // residual-stream width
  int key_dim = 16;   // per-head query/key/value width
  int heads = 4;
  int ff_dim = 128;
  double dropout = 0.0;
};

ModelConfig model_config_from_json(const json& j);
json model_config_to_json(const ModelConfig& cfg);

// Parameter paths in creation order (embedding, encoder blocks, final norm,
// edge head). Initialization draws follow this order.
std::vector<std::string> param_paths(const ModelConfig& cfg);

// Kaiming-uniform weights (bound sqrt(6/fan_in)), zero biases, unit layer-norm
// gains, and an edge-head bias of -3 so an untrained net predicts sparse graphs.
// The two edge-scorer maps use a bound shrunk by an extra 1/fan_in so initial
// edge logits stay near the bias instead of saturating the logistic.
void init_params(ParamStore& store, const ModelConfig& cfg, Rng& rng);

// Parameters registered on a tape so gradients can be mapped back to paths.
struct BoundParams {
  std::map<std::string, Var> vars;
  const Var& at(const std::string& path) const;
};
BoundParams bind_params(Tape& tape, const ParamStore& store);
std::map<std::string, Tensor> grads_by_path(const std::vector<Tensor>& grads,
                                            const BoundParams& bound);

struct ModelOutput {
  Var logits;  // (d, d) edge scores, diagonal meaningless
  Var theta;   // (d, d) edge probabilities, diagonal exactly zero
};

// Full forward pass: token embedding, alternating-axis transformer encoder,
// max-pool over observations, bilinear edge head. `drop_rng` supplies dropout
// masks and must be non-null when training with cfg.dropout > 0.
ModelOutput model_forward(Tape& tape, const BoundParams& params, const ModelConfig& cfg,
                          const Dataset& data, bool training, Rng* drop_rng);

// log q(G | theta) = sum over ordered pairs i != j of the Bernoulli
// log-likelihood of the edge indicator, with probabilities clamped away from
// {0, 1} by 1e-7.
Var model_log_q(Tape& tape, const Var& theta, const Graph& g);

// Convenience: forward pass without a recording tape.
Tensor predict_theta(const ParamStore& store, const ModelConfig& cfg, const Dataset& data);

}  // namespace cadet
