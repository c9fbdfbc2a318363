#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace cadet {

// Dense row-major tensor of 64-bit reals. Rank-0 (shape {}) is a scalar with
// one element.
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> sh, double fill = 0.0);
  static Tensor scalar(double v);
  static Tensor from(std::vector<int64_t> sh, std::vector<double> values);

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  bool defined() const { return !data.empty(); }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  double& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }
};

int64_t shape_numel(const std::vector<int64_t>& s);
std::string shape_to_string(const std::vector<int64_t>& s);

bool all_finite(const Tensor& t);
void ensure_finite(const Tensor& t, const char* op);

// --- primitive kernels (pure functions; used by the tape for both passes) ---

// Elementwise with suffix broadcasting: b.shape must equal a.shape or be a
// trailing suffix of it (scalars broadcast everywhere).
bool suffix_broadcastable(const std::vector<int64_t>& a, const std::vector<int64_t>& b);
Tensor bc_add(const Tensor& a, const Tensor& b);
Tensor bc_sub(const Tensor& a, const Tensor& b);
Tensor bc_mul(const Tensor& a, const Tensor& b);
// Sum g over leading axes so the result has `target` shape (broadcast adjoint).
Tensor reduce_to_shape(const Tensor& g, const std::vector<int64_t>& target);

// Batched matmul over the last two axes. Batch dims must match exactly, or
// one operand may be rank-2 (broadcast across the other's batch dims).
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor transpose(const Tensor& a, const std::vector<int>& perm);
std::vector<int> inverse_perm(const std::vector<int>& perm);
Tensor reshape(const Tensor& a, const std::vector<int64_t>& new_shape);

Tensor relu(const Tensor& a);
Tensor relu_backward(const Tensor& g, const Tensor& a);
Tensor logistic(const Tensor& a);
Tensor logistic_backward(const Tensor& g, const Tensor& y);
Tensor log_(const Tensor& a);
Tensor log_backward(const Tensor& g, const Tensor& a);
Tensor exp_(const Tensor& a);
Tensor exp_backward(const Tensor& g, const Tensor& y);
Tensor clamp(const Tensor& a, double lo, double hi);
Tensor clamp_backward(const Tensor& g, const Tensor& a, double lo, double hi);
Tensor scale(const Tensor& a, double c);

Tensor softmax(const Tensor& a, int axis);
Tensor softmax_backward(const Tensor& g, const Tensor& y, int axis);

Tensor maxreduce(const Tensor& a, int axis, std::vector<int64_t>* argmax);
Tensor maxreduce_backward(const Tensor& g, const std::vector<int64_t>& in_shape, int axis,
                          const std::vector<int64_t>& argmax);

// Layer normalization over the last axis with learned gain/offset (shape {k}).
Tensor layernorm(const Tensor& x, const Tensor& gain, const Tensor& offset, Tensor* xhat_out,
                 Tensor* inv_std_out);
Tensor layernorm_backward(const Tensor& g, const Tensor& xhat, const Tensor& inv_std,
                          const Tensor& gain, Tensor* dgain, Tensor* doffset);

Tensor sum_all(const Tensor& a);

// acc += g, allocating zeros(like g) when acc is empty.
void accumulate(Tensor& acc, const Tensor& g);

double l2_norm(const Tensor& t);

}  // namespace cadet
