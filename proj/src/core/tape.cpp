#include "core/tape.hpp"

namespace cadet {

namespace {

std::shared_ptr<const Tensor> wrap(Tensor t) {
  return std::make_shared<const Tensor>(std::move(t));
}

std::vector<int> swap_last_two(int rank) {
  std::vector<int> perm(static_cast<size_t>(rank));
  for (int i = 0; i < rank; ++i) perm[static_cast<size_t>(i)] = i;
  std::swap(perm[static_cast<size_t>(rank - 2)], perm[static_cast<size_t>(rank - 1)]);
  return perm;
}

}  // namespace

Var Tape::leaf(Tensor t) {
  Var v{wrap(std::move(t)), -1};
  if (recording) {
    TapeNode n;
    n.op = Op::leaf;
    n.out = v.val;
    v.node = push(std::move(n));
  }
  return v;
}

Var Tape::constant(Tensor t) { return Var{wrap(std::move(t)), -1}; }

int Tape::push(TapeNode n) {
  nodes.push_back(std::move(n));
  return static_cast<int>(nodes.size()) - 1;
}

namespace {

// Shared helper: run the forward kernel and, if recording, file the node.
Var emit(Tape& t, TapeNode n, Tensor result, const Var& a, const Var& b = Var{},
         const Var& c = Var{}) {
  Var out{wrap(std::move(result)), -1};
  if (t.recording) {
    n.in0 = a.node;
    n.v0 = a.val;
    if (b.val) {
      n.in1 = b.node;
      n.v1 = b.val;
    }
    if (c.val) {
      n.in2 = c.node;
      n.v2 = c.val;
    }
    n.out = out.val;
    out.node = t.push(std::move(n));
  }
  return out;
}

}  // namespace

Var t_add(Tape& t, const Var& a, const Var& b) {
  TapeNode n;
  n.op = Op::add;
  return emit(t, std::move(n), bc_add(a.v(), b.v()), a, b);
}

Var t_sub(Tape& t, const Var& a, const Var& b) {
  TapeNode n;
  n.op = Op::sub;
  return emit(t, std::move(n), bc_sub(a.v(), b.v()), a, b);
}

Var t_mul(Tape& t, const Var& a, const Var& b) {
  TapeNode n;
  n.op = Op::mul;
  return emit(t, std::move(n), bc_mul(a.v(), b.v()), a, b);
}

Var t_matmul(Tape& t, const Var& a, const Var& b) {
  TapeNode n;
  n.op = Op::matmul_op;
  return emit(t, std::move(n), matmul(a.v(), b.v()), a, b);
}

Var t_transpose(Tape& t, const Var& a, const std::vector<int>& perm) {
  TapeNode n;
  n.op = Op::transpose_op;
  n.perm = perm;
  return emit(t, std::move(n), transpose(a.v(), perm), a);
}

Var t_reshape(Tape& t, const Var& a, const std::vector<int64_t>& shape) {
  TapeNode n;
  n.op = Op::reshape_op;
  n.ints = a.v().shape;
  return emit(t, std::move(n), reshape(a.v(), shape), a);
}

Var t_relu(Tape& t, const Var& a) {
  TapeNode n;
  n.op = Op::relu_op;
  return emit(t, std::move(n), relu(a.v()), a);
}

Var t_logistic(Tape& t, const Var& a) {
  TapeNode n;
  n.op = Op::logistic_op;
  return emit(t, std::move(n), logistic(a.v()), a);
}

Var t_log(Tape& t, const Var& a) {
  TapeNode n;
  n.op = Op::log_op;
  return emit(t, std::move(n), log_(a.v()), a);
}

Var t_exp(Tape& t, const Var& a) {
  TapeNode n;
  n.op = Op::exp_op;
  return emit(t, std::move(n), exp_(a.v()), a);
}

Var t_clamp(Tape& t, const Var& a, double lo, double hi) {
  TapeNode n;
  n.op = Op::clamp_op;
  n.c0 = lo;
  n.c1 = hi;
  return emit(t, std::move(n), clamp(a.v(), lo, hi), a);
}

Var t_scale(Tape& t, const Var& a, double c) {
  TapeNode n;
  n.op = Op::scale_op;
  n.c0 = c;
  return emit(t, std::move(n), scale(a.v(), c), a);
}

Var t_softmax(Tape& t, const Var& a, int axis) {
  TapeNode n;
  n.op = Op::softmax_op;
  n.axis = axis;
  return emit(t, std::move(n), softmax(a.v(), axis), a);
}

Var t_layernorm(Tape& t, const Var& x, const Var& gain, const Var& offset) {
  TapeNode n;
  n.op = Op::layernorm_op;
  Tensor xhat, inv_std;
  Tensor y = layernorm(x.v(), gain.v(), offset.v(), t.recording ? &xhat : nullptr,
                       t.recording ? &inv_std : nullptr);
  if (t.recording) {
    n.aux0 = wrap(std::move(xhat));
    n.aux1 = wrap(std::move(inv_std));
  }
  return emit(t, std::move(n), std::move(y), x, gain, offset);
}

Var t_maxpool(Tape& t, const Var& a, int axis) {
  TapeNode n;
  n.op = Op::maxpool_op;
  n.axis = axis;
  std::vector<int64_t> argmax;
  Tensor y = maxreduce(a.v(), axis, t.recording ? &argmax : nullptr);
  n.ints = std::move(argmax);
  return emit(t, std::move(n), std::move(y), a);
}

Var t_sum(Tape& t, const Var& a) {
  TapeNode n;
  n.op = Op::sum_op;
  n.ints = a.v().shape;
  return emit(t, std::move(n), sum_all(a.v()), a);
}

std::vector<Tensor> Tape::backward(const Var& loss) const {
  if (loss.node < 0) {
    raise(ErrorKind::invalid_argument, "backward: loss was not produced under taping");
  }
  if (loss.v().numel() != 1) {
    raise(ErrorKind::invalid_argument,
          "backward: loss must be scalar, got shape " + shape_to_string(loss.v().shape));
  }
  std::vector<Tensor> grads(nodes.size());
  grads[static_cast<size_t>(loss.node)] = Tensor(loss.v().shape, 1.0);

  auto acc_input = [&grads](int node_id, Tensor g) {
    if (node_id >= 0) accumulate(grads[static_cast<size_t>(node_id)], std::move(g));
  };

  for (int i = loss.node; i >= 0; --i) {
    const Tensor& g = grads[static_cast<size_t>(i)];
    if (!g.defined()) continue;
    const TapeNode& n = nodes[static_cast<size_t>(i)];
    switch (n.op) {
      case Op::leaf:
        break;
      case Op::add:
        acc_input(n.in0, reduce_to_shape(g, n.v0->shape));
        acc_input(n.in1, reduce_to_shape(g, n.v1->shape));
        break;
      case Op::sub:
        acc_input(n.in0, reduce_to_shape(g, n.v0->shape));
        acc_input(n.in1, scale(reduce_to_shape(g, n.v1->shape), -1.0));
        break;
      case Op::mul:
        acc_input(n.in0, bc_mul(g, *n.v1));
        acc_input(n.in1, reduce_to_shape(bc_mul(g, *n.v0), n.v1->shape));
        break;
      case Op::matmul_op: {
        if (n.in0 >= 0) {
          Tensor bt = transpose(*n.v1, swap_last_two(n.v1->rank()));
          acc_input(n.in0, reduce_to_shape(matmul(g, bt), n.v0->shape));
        }
        if (n.in1 >= 0) {
          Tensor at = transpose(*n.v0, swap_last_two(n.v0->rank()));
          acc_input(n.in1, reduce_to_shape(matmul(at, g), n.v1->shape));
        }
        break;
      }
      case Op::transpose_op:
        acc_input(n.in0, transpose(g, inverse_perm(n.perm)));
        break;
      case Op::reshape_op:
        acc_input(n.in0, reshape(g, n.ints));
        break;
      case Op::relu_op:
        acc_input(n.in0, relu_backward(g, *n.v0));
        break;
      case Op::logistic_op:
        acc_input(n.in0, logistic_backward(g, *n.out));
        break;
      case Op::log_op:
        acc_input(n.in0, log_backward(g, *n.v0));
        break;
      case Op::exp_op:
        acc_input(n.in0, exp_backward(g, *n.out));
        break;
      case Op::clamp_op:
        acc_input(n.in0, clamp_backward(g, *n.v0, n.c0, n.c1));
        break;
      case Op::scale_op:
        acc_input(n.in0, scale(g, n.c0));
        break;
      case Op::softmax_op:
        acc_input(n.in0, softmax_backward(g, *n.out, n.axis));
        break;
      case Op::layernorm_op: {
        Tensor dgain, doffset;
        Tensor dx = layernorm_backward(g, *n.aux0, *n.aux1, *n.v1, &dgain, &doffset);
        acc_input(n.in0, std::move(dx));
        acc_input(n.in1, std::move(dgain));
        acc_input(n.in2, std::move(doffset));
        break;
      }
      case Op::maxpool_op:
        acc_input(n.in0, maxreduce_backward(g, n.v0->shape, n.axis, n.ints));
        break;
      case Op::sum_op:
        acc_input(n.in0, Tensor(n.ints, g.data[0]));
        break;
    }
  }
  return grads;
}

Tensor Tape::grad_of(const std::vector<Tensor>& grads, const Var& v) {
  if (v.node >= 0 && grads[static_cast<size_t>(v.node)].defined()) {
    return grads[static_cast<size_t>(v.node)];
  }
  return Tensor(v.v().shape, 0.0);
}

}  // namespace cadet
