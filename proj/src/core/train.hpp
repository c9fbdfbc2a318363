#pragma once

#include "core/buffer.hpp"
#include "core/checkpoint.hpp"
#include "core/model.hpp"
#include "core/spectral.hpp"

namespace cadet {

struct AcyclicityConfig {
  bool enabled = true;
  int t = 10;               // power iterations per penalty evaluation
  double eta = 0.1;         // dual step size (after warmup)
  int64_t dual_every = 50;  // primal steps between dual updates
  double warmup_frac = 0.2;
};
AcyclicityConfig acyclicity_from_json(const json& j);
json acyclicity_to_json(const AcyclicityConfig& cfg);

struct ScheduleConfig {
  int64_t total_steps = 2000;
  int batch_max = 8;  // examples per step at the smallest d; also sets the lr scale
  int d_low = 2, d_high = 8;
  std::vector<int64_t> n_choices{50, 100};
  double base_lr = 3e-5;       // multiplied by sqrt(batch_max)
  double lr_drop_frac = 0.8;   // late-phase x0.1 drop point
  int64_t buffer_capacity = 50;
  int64_t log_every = 10;
  int64_t checkpoint_every = 1000;
};
ScheduleConfig schedule_from_json(const json& j);
json schedule_to_json(const ScheduleConfig& cfg);

// Batch size shrinks with d so a step costs roughly the same at every size;
// the sampling weights in pick_d compensate so examples seen per d stay equal.
int batch_size_for(const ScheduleConfig& schedule, int d);
int pick_d(const ScheduleConfig& schedule, Rng& rng);
double learning_rate(const ScheduleConfig& schedule, int64_t step);

struct TrainConfig {
  DomainConfig domain;
  ModelConfig model;
  ScheduleConfig schedule;
  AcyclicityConfig acyclicity;
  uint64_t seed = 0;
  int workers = 0;      // 0 = fully synchronous (bit-reproducible)
  std::string resume;   // checkpoint path; empty for a fresh run
};
TrainConfig train_config_from_json(const json& j);
json train_config_to_json(const TrainConfig& cfg);

// Loss over one batch (all tasks share d): -mean log q + lambda * mean h,
// with parameter gradients. `step_rng` drives dropout masks and the power
// iterations, in batch order.
struct StepOutput {
  double loss = 0.0;
  double f_mean = 0.0;  // mean spectral penalty (0 when acyclicity disabled)
  std::map<std::string, Tensor> grads;
};
StepOutput loss_and_grads(const ParamStore& store, const ModelConfig& model,
                          const std::vector<Task>& batch, double lambda,
                          const AcyclicityConfig& acyc, bool training, Rng& step_rng);

struct TrainResult {
  ParamStore store;
  ModelConfig model;
  int64_t steps = 0;
  double lambda = 0.0;
  double f_ema = 0.0;
};

// Runs the training loop, writing metrics.jsonl and checkpoint files under
// `out_dir`. On a non-finite loss the batch provenance is dumped to
// diagnostics.json and a numeric error is raised.
TrainResult train(const TrainConfig& cfg, const std::string& out_dir);

}  // namespace cadet
