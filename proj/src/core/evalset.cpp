#include "core/evalset.hpp"

#include "core/scm.hpp"

namespace cadet {

std::vector<Task> make_eval_tasks(const DomainConfig& domain, int d, int64_t n, int count,
                                  uint64_t seed, bool force_interventional) {
  DomainConfig dom = domain;
  if (force_interventional) dom.interventions.probability = 1.0;
  uint64_t base = mix_seed(seed, hash_tag("eval"));
  std::vector<Task> tasks;
  tasks.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(mix_seed(base, static_cast<uint64_t>(i)));
    tasks.push_back(build_task(dom, d, n, rng));
  }
  return tasks;
}

std::vector<EvalReport> evaluate_model_on_tasks(const ParamStore& store, const ModelConfig& model,
                                                const std::vector<Task>& tasks, double tau) {
  std::vector<EvalReport> reports;
  reports.reserve(tasks.size());
  for (const auto& task : tasks) {
    Tensor theta = predict_theta(store, model, task.data);
    reports.push_back(evaluate(theta, task.g, tau));
  }
  return reports;
}

}  // namespace cadet
