#pragma once

#include <memory>
#include <vector>

#include "core/tensor.hpp"

namespace cadet {

enum class Op : uint8_t {
  leaf,
  add,
  sub,
  mul,
  matmul_op,
  transpose_op,
  reshape_op,
  relu_op,
  logistic_op,
  log_op,
  exp_op,
  clamp_op,
  scale_op,
  softmax_op,
  layernorm_op,
  maxpool_op,
  sum_op,
};

struct TapeNode {
  Op op = Op::leaf;
  int in0 = -1, in1 = -1, in2 = -1;  // -1 marks a constant (no gradient flows)
  std::shared_ptr<const Tensor> v0, v1, v2;  // saved input values
  std::shared_ptr<const Tensor> out;         // saved output where backward needs it
  std::shared_ptr<const Tensor> aux0, aux1;  // layernorm: xhat, inv_std
  std::vector<int> perm;
  std::vector<int64_t> ints;  // maxpool argmax / reshape input shape
  int axis = 0;
  double c0 = 0.0, c1 = 0.0;
};

// A value in a taped computation. `node` is -1 for constants and for all
// values produced while the tape is not recording.
struct Var {
  std::shared_ptr<const Tensor> val;
  int node = -1;
  const Tensor& v() const { return *val; }
};

// Records the computation DAG. Creation order is a topological order, so
// backward() is a single reverse sweep. backward() does not mutate the tape;
// several losses built on one tape can each be differentiated independently.
class Tape {
 public:
  bool recording = true;
  std::vector<TapeNode> nodes;

  Var leaf(Tensor t);
  static Var constant(Tensor t);

  std::vector<Tensor> backward(const Var& loss) const;

  // Gradient of `loss` w.r.t. `v`; zeros(shape) when v is unreachable.
  static Tensor grad_of(const std::vector<Tensor>& grads, const Var& v);

  int push(TapeNode n);
};

Var t_add(Tape& t, const Var& a, const Var& b);
Var t_sub(Tape& t, const Var& a, const Var& b);
Var t_mul(Tape& t, const Var& a, const Var& b);
Var t_matmul(Tape& t, const Var& a, const Var& b);
Var t_transpose(Tape& t, const Var& a, const std::vector<int>& perm);
Var t_reshape(Tape& t, const Var& a, const std::vector<int64_t>& shape);
Var t_relu(Tape& t, const Var& a);
Var t_logistic(Tape& t, const Var& a);
Var t_log(Tape& t, const Var& a);
Var t_exp(Tape& t, const Var& a);
Var t_clamp(Tape& t, const Var& a, double lo, double hi);
Var t_scale(Tape& t, const Var& a, double c);
Var t_softmax(Tape& t, const Var& a, int axis);
Var t_layernorm(Tape& t, const Var& x, const Var& gain, const Var& offset);
Var t_maxpool(Tape& t, const Var& a, int axis);
Var t_sum(Tape& t, const Var& a);

}  // namespace cadet
