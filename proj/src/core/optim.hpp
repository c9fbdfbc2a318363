#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace cadet {

// Named parameter set with LAMB optimizer slots. std::map keeps iteration
// order deterministic, which checkpoint byte-stability relies on.
struct ParamStore {
  std::map<std::string, Tensor> params;
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;

  void add(const std::string& path, Tensor t);
  Tensor& at(const std::string& path);
  const Tensor& at(const std::string& path) const;
  bool has(const std::string& path) const { return params.count(path) > 0; }
};

struct LambConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-6;
  double weight_decay = 0.0;
};

// One LAMB step over all parameters. Gradients are looked up by path; a
// missing gradient counts as zero. Parameters whose gradient contains a
// non-finite value are skipped and their paths returned.
std::vector<std::string> lamb_update(ParamStore& store, const std::map<std::string, Tensor>& grads,
                                     int64_t step, double lr, const LambConfig& cfg = {});

}  // namespace cadet
