#pragma once

#include <map>
#include <optional>
#include <string>

#include "core/json_util.hpp"
#include "core/model.hpp"
#include "core/optim.hpp"

namespace cadet {

// Optimizer/trainer state needed to continue a run exactly where it stopped.
// Buffered tasks are stored as their generation counters and re-simulated on
// load, which keeps checkpoints small without losing state.
struct TrainStateSnapshot {
  int64_t step = 0;
  double lambda = 0.0;
  double f_ema = 0.0;
  std::string trainer_rng;
  std::map<int, int64_t> next_counter;                 // per-d producer counters
  std::map<int, std::vector<int64_t>> queue_counters;  // FIFO order, oldest first
  std::map<int, int64_t> samples;                      // per-d sample tallies
};

struct Checkpoint {
  ParamStore store;  // params + optimizer moments
  ModelConfig model;
  int64_t opt_step = 0;
  json run_config;  // full training config, when saved by a training run
  std::optional<TrainStateSnapshot> state;
};

// Writes <dir>/checkpoint.json and <dir>/params.bin (flat little-endian
// doubles: parameters, then first and second moments, in manifest order).
void save_checkpoint(const std::string& dir, const ParamStore& store, const ModelConfig& model,
                     int64_t opt_step, const json* run_config, const TrainStateSnapshot* state);

// `path` may be the manifest file or its directory.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cadet
