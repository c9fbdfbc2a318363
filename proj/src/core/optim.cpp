#include "core/optim.hpp"

#include <cmath>

namespace cadet {

void ParamStore::add(const std::string& path, Tensor t) {
  if (params.count(path)) raise(ErrorKind::invalid_argument, "ParamStore: duplicate path " + path);
  params.emplace(path, std::move(t));
}

Tensor& ParamStore::at(const std::string& path) {
  auto it = params.find(path);
  if (it == params.end()) raise(ErrorKind::invalid_argument, "ParamStore: unknown path " + path);
  return it->second;
}

const Tensor& ParamStore::at(const std::string& path) const {
  auto it = params.find(path);
  if (it == params.end()) raise(ErrorKind::invalid_argument, "ParamStore: unknown path " + path);
  return it->second;
}

std::vector<std::string> lamb_update(ParamStore& store, const std::map<std::string, Tensor>& grads,
                                     int64_t step, double lr, const LambConfig& cfg) {
  if (step < 1) raise(ErrorKind::invalid_argument, "lamb_update: step must be >= 1");
  std::vector<std::string> skipped;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (auto& [path, p] : store.params) {
    const Tensor* g = nullptr;
    auto git = grads.find(path);
    if (git != grads.end() && git->second.defined()) g = &git->second;

    if (g != nullptr) {
      if (g->shape != p.shape) {
        raise(ErrorKind::invalid_argument, "lamb_update: gradient shape mismatch for " + path);
      }
      if (!all_finite(*g)) {
        skipped.push_back(path);
        CADET_LOG_WARN("lamb_update: non-finite gradient for %s, update skipped", path.c_str());
        continue;
      }
    }

    Tensor& m = store.m.try_emplace(path, Tensor(p.shape, 0.0)).first->second;
    Tensor& v = store.v.try_emplace(path, Tensor(p.shape, 0.0)).first->second;

    double p_norm_sq = 0.0, u_norm_sq = 0.0;
    std::vector<double> update(p.data.size());
    for (size_t i = 0; i < p.data.size(); ++i) {
      const double gi = g ? g->data[i] : 0.0;
      m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * gi;
      v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * gi * gi;
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      const double u = mhat / (std::sqrt(vhat) + cfg.eps) + cfg.weight_decay * p.data[i];
      update[i] = u;
      p_norm_sq += p.data[i] * p.data[i];
      u_norm_sq += u * u;
    }
    const double p_norm = std::sqrt(p_norm_sq);
    const double u_norm = std::sqrt(u_norm_sq);
    const double ratio = (p_norm > 0.0 && u_norm > 0.0) ? p_norm / u_norm : 1.0;
    for (size_t i = 0; i < p.data.size(); ++i) p.data[i] -= lr * ratio * update[i];
  }
  return skipped;
}

}  // namespace cadet
