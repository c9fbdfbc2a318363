#pragma once

#include "core/metrics.hpp"
#include "core/model.hpp"

namespace cadet {

// Held-out tasks drawn from a dedicated seed stream (disjoint from the
// training-task stream). When `force_interventional` is set every task gets
// the interventional half regardless of the domain's coin.
std::vector<Task> make_eval_tasks(const DomainConfig& domain, int d, int64_t n, int count,
                                  uint64_t seed, bool force_interventional);

std::vector<EvalReport> evaluate_model_on_tasks(const ParamStore& store, const ModelConfig& model,
                                                const std::vector<Task>& tasks, double tau = 0.5);

}  // namespace cadet
