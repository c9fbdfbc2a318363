#include "core/tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace cadet {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConstMat = Eigen::Map<const RowMat>;

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  raise(ErrorKind::invalid_argument, std::string(op) + ": shape mismatch " +
                                         shape_to_string(a.shape) + " vs " +
                                         shape_to_string(b.shape));
}

int normalize_axis(int axis, int rank, const char* op) {
  int ax = axis < 0 ? axis + rank : axis;
  if (ax < 0 || ax >= rank) {
    raise(ErrorKind::invalid_argument,
          std::string(op) + ": axis " + std::to_string(axis) + " out of range for rank " +
              std::to_string(rank));
  }
  return ax;
}

// Split shape into (outer, axis extent, inner) strides around `axis`.
void axis_split(const std::vector<int64_t>& shape, int axis, int64_t* outer, int64_t* extent,
                int64_t* inner) {
  *outer = 1;
  *inner = 1;
  for (int i = 0; i < axis; ++i) *outer *= shape[static_cast<size_t>(i)];
  *extent = shape[static_cast<size_t>(axis)];
  for (size_t i = static_cast<size_t>(axis) + 1; i < shape.size(); ++i) *inner *= shape[i];
}

}  // namespace

Tensor::Tensor(std::vector<int64_t> sh, double fill) : shape(std::move(sh)) {
  for (int64_t e : shape) {
    if (e < 0) raise(ErrorKind::invalid_argument, "Tensor: negative extent");
  }
  data.assign(static_cast<size_t>(shape_numel(shape)), fill);
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.data.assign(1, v);
  return t;
}

Tensor Tensor::from(std::vector<int64_t> sh, std::vector<double> values) {
  if (shape_numel(sh) != static_cast<int64_t>(values.size())) {
    raise(ErrorKind::invalid_argument, "Tensor::from: values do not match shape " +
                                           shape_to_string(sh));
  }
  Tensor t;
  t.shape = std::move(sh);
  t.data = std::move(values);
  return t;
}

int64_t shape_numel(const std::vector<int64_t>& s) {
  int64_t n = 1;
  for (int64_t e : s) n *= e;
  return n;
}

std::string shape_to_string(const std::vector<int64_t>& s) {
  std::ostringstream os;
  os << '(';
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ')';
  return os.str();
}

bool all_finite(const Tensor& t) {
  for (double v : t.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void ensure_finite(const Tensor& t, const char* op) {
  if (!all_finite(t)) {
    raise(ErrorKind::numeric, std::string(op) + ": non-finite value in result of shape " +
                                  shape_to_string(t.shape));
  }
}

bool suffix_broadcastable(const std::vector<int64_t>& a, const std::vector<int64_t>& b) {
  if (b.size() > a.size()) return false;
  size_t off = a.size() - b.size();
  for (size_t i = 0; i < b.size(); ++i) {
    if (a[off + i] != b[i]) return false;
  }
  return true;
}

namespace {

template <class F>
Tensor bc_elementwise(const Tensor& a, const Tensor& b, F f, const char* op) {
  if (!suffix_broadcastable(a.shape, b.shape)) shape_error(op, a, b);
  Tensor out;
  out.shape = a.shape;
  out.data.resize(a.data.size());
  const int64_t bn = b.numel();
  const int64_t an = a.numel();
  if (bn == an) {
    for (int64_t i = 0; i < an; ++i) out.data[static_cast<size_t>(i)] = f(a[i], b[i]);
  } else {
    for (int64_t i = 0; i < an; ++i) out.data[static_cast<size_t>(i)] = f(a[i], b[i % bn]);
  }
  ensure_finite(out, op);
  return out;
}

}  // namespace

Tensor bc_add(const Tensor& a, const Tensor& b) {
  return bc_elementwise(a, b, [](double x, double y) { return x + y; }, "add");
}

Tensor bc_sub(const Tensor& a, const Tensor& b) {
  return bc_elementwise(a, b, [](double x, double y) { return x - y; }, "sub");
}

Tensor bc_mul(const Tensor& a, const Tensor& b) {
  return bc_elementwise(a, b, [](double x, double y) { return x * y; }, "mul");
}

Tensor reduce_to_shape(const Tensor& g, const std::vector<int64_t>& target) {
  if (!suffix_broadcastable(g.shape, target)) {
    raise(ErrorKind::invalid_argument, "reduce_to_shape: " + shape_to_string(target) +
                                           " is not a suffix of " + shape_to_string(g.shape));
  }
  Tensor out;
  out.shape = target;
  out.data.assign(static_cast<size_t>(shape_numel(target)), 0.0);
  const int64_t tn = out.numel();
  for (int64_t i = 0; i < g.numel(); ++i) out.data[static_cast<size_t>(i % tn)] += g[i];
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() < 2 || b.rank() < 2) shape_error("matmul", a, b);
  const int64_t m = a.shape[static_cast<size_t>(a.rank() - 2)];
  const int64_t k = a.shape[static_cast<size_t>(a.rank() - 1)];
  const int64_t k2 = b.shape[static_cast<size_t>(b.rank() - 2)];
  const int64_t p = b.shape[static_cast<size_t>(b.rank() - 1)];
  if (k != k2) shape_error("matmul", a, b);

  std::vector<int64_t> abatch(a.shape.begin(), a.shape.end() - 2);
  std::vector<int64_t> bbatch(b.shape.begin(), b.shape.end() - 2);
  std::vector<int64_t> batch;
  bool a_bcast = false, b_bcast = false;
  if (abatch == bbatch) {
    batch = abatch;
  } else if (abatch.empty()) {
    batch = bbatch;
    a_bcast = true;
  } else if (bbatch.empty()) {
    batch = abatch;
    b_bcast = true;
  } else {
    shape_error("matmul", a, b);
  }

  std::vector<int64_t> out_shape = batch;
  out_shape.push_back(m);
  out_shape.push_back(p);
  Tensor out;
  out.shape = std::move(out_shape);
  out.data.resize(static_cast<size_t>(shape_numel(out.shape)));

  const int64_t nbatch = shape_numel(batch);
  const int64_t a_step = a_bcast ? 0 : m * k;
  const int64_t b_step = b_bcast ? 0 : k * p;
  for (int64_t s = 0; s < nbatch; ++s) {
    MapConstMat ma(a.data.data() + s * a_step, m, k);
    MapConstMat mb(b.data.data() + s * b_step, k, p);
    MapMat mo(out.data.data() + s * m * p, m, p);
    mo.noalias() = ma * mb;
  }
  ensure_finite(out, "matmul");
  return out;
}

std::vector<int> inverse_perm(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (size_t i = 0; i < perm.size(); ++i) inv[static_cast<size_t>(perm[i])] = static_cast<int>(i);
  return inv;
}

Tensor transpose(const Tensor& a, const std::vector<int>& perm) {
  const int r = a.rank();
  if (static_cast<int>(perm.size()) != r) {
    raise(ErrorKind::invalid_argument, "transpose: permutation rank mismatch for shape " +
                                           shape_to_string(a.shape));
  }
  std::vector<bool> seen(static_cast<size_t>(r), false);
  for (int p : perm) {
    if (p < 0 || p >= r || seen[static_cast<size_t>(p)]) {
      raise(ErrorKind::invalid_argument, "transpose: invalid permutation");
    }
    seen[static_cast<size_t>(p)] = true;
  }
  Tensor out;
  out.shape.resize(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) {
    out.shape[static_cast<size_t>(i)] = a.shape[static_cast<size_t>(perm[static_cast<size_t>(i)])];
  }
  out.data.resize(a.data.size());
  if (r == 0) {
    out.data = a.data;
    return out;
  }
  // in_strides permuted into the out iteration order.
  std::vector<int64_t> in_strides(static_cast<size_t>(r), 1);
  for (int i = r - 2; i >= 0; --i) {
    in_strides[static_cast<size_t>(i)] =
        in_strides[static_cast<size_t>(i + 1)] * a.shape[static_cast<size_t>(i + 1)];
  }
  std::vector<int64_t> step(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) {
    step[static_cast<size_t>(i)] = in_strides[static_cast<size_t>(perm[static_cast<size_t>(i)])];
  }
  std::vector<int64_t> coord(static_cast<size_t>(r), 0);
  int64_t src = 0;
  const int64_t total = out.numel();
  for (int64_t idx = 0; idx < total; ++idx) {
    out.data[static_cast<size_t>(idx)] = a.data[static_cast<size_t>(src)];
    for (int ax = r - 1; ax >= 0; --ax) {
      coord[static_cast<size_t>(ax)]++;
      src += step[static_cast<size_t>(ax)];
      if (coord[static_cast<size_t>(ax)] < out.shape[static_cast<size_t>(ax)]) break;
      src -= step[static_cast<size_t>(ax)] * out.shape[static_cast<size_t>(ax)];
      coord[static_cast<size_t>(ax)] = 0;
    }
  }
  return out;
}

Tensor reshape(const Tensor& a, const std::vector<int64_t>& new_shape) {
  if (shape_numel(new_shape) != a.numel()) {
    raise(ErrorKind::invalid_argument, "reshape: cannot view " + shape_to_string(a.shape) +
                                           " as " + shape_to_string(new_shape));
  }
  Tensor out;
  out.shape = new_shape;
  out.data = a.data;
  return out;
}

namespace {

template <class F>
Tensor unary(const Tensor& a, F f, const char* op) {
  Tensor out;
  out.shape = a.shape;
  out.data.resize(a.data.size());
  for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = f(a.data[i]);
  ensure_finite(out, op);
  return out;
}

}  // namespace

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0 ? x : 0.0; }, "relu");
}

Tensor relu_backward(const Tensor& g, const Tensor& a) {
  Tensor out;
  out.shape = g.shape;
  out.data.resize(g.data.size());
  for (size_t i = 0; i < g.data.size(); ++i) out.data[i] = a.data[i] > 0 ? g.data[i] : 0.0;
  return out;
}

Tensor logistic(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        double e = std::exp(x);
        return e / (1.0 + e);
      },
      "logistic");
}

Tensor logistic_backward(const Tensor& g, const Tensor& y) {
  Tensor out;
  out.shape = g.shape;
  out.data.resize(g.data.size());
  for (size_t i = 0; i < g.data.size(); ++i) out.data[i] = g.data[i] * y.data[i] * (1.0 - y.data[i]);
  return out;
}

Tensor log_(const Tensor& a) {
  return unary(a, [](double x) { return std::log(x); }, "log");
}

Tensor log_backward(const Tensor& g, const Tensor& a) {
  Tensor out;
  out.shape = g.shape;
  out.data.resize(g.data.size());
  for (size_t i = 0; i < g.data.size(); ++i) out.data[i] = g.data[i] / a.data[i];
  return out;
}

Tensor exp_(const Tensor& a) {
  return unary(a, [](double x) { return std::exp(x); }, "exp");
}

Tensor exp_backward(const Tensor& g, const Tensor& y) {
  Tensor out;
  out.shape = g.shape;
  out.data.resize(g.data.size());
  for (size_t i = 0; i < g.data.size(); ++i) out.data[i] = g.data[i] * y.data[i];
  return out;
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  return unary(a, [lo, hi](double x) { return std::min(hi, std::max(lo, x)); }, "clamp");
}

Tensor clamp_backward(const Tensor& g, const Tensor& a, double lo, double hi) {
  Tensor out;
  out.shape = g.shape;
  out.data.resize(g.data.size());
  for (size_t i = 0; i < g.data.size(); ++i) {
    out.data[i] = (a.data[i] > lo && a.data[i] < hi) ? g.data[i] : 0.0;
  }
  return out;
}

Tensor scale(const Tensor& a, double c) {
  return unary(a, [c](double x) { return c * x; }, "scale");
}

Tensor softmax(const Tensor& a, int axis) {
  const int ax = normalize_axis(axis, a.rank(), "softmax");
  int64_t outer, extent, inner;
  axis_split(a.shape, ax, &outer, &extent, &inner);
  Tensor out;
  out.shape = a.shape;
  out.data.resize(a.data.size());
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t in = 0; in < inner; ++in) {
      const int64_t base = o * extent * inner + in;
      double mx = -HUGE_VAL;
      for (int64_t e = 0; e < extent; ++e) mx = std::max(mx, a[base + e * inner]);
      double denom = 0.0;
      for (int64_t e = 0; e < extent; ++e) {
        double v = std::exp(a[base + e * inner] - mx);
        out.data[static_cast<size_t>(base + e * inner)] = v;
        denom += v;
      }
      for (int64_t e = 0; e < extent; ++e) out.data[static_cast<size_t>(base + e * inner)] /= denom;
    }
  }
  ensure_finite(out, "softmax");
  return out;
}

Tensor softmax_backward(const Tensor& g, const Tensor& y, int axis) {
  const int ax = normalize_axis(axis, y.rank(), "softmax");
  int64_t outer, extent, inner;
  axis_split(y.shape, ax, &outer, &extent, &inner);
  Tensor out;
  out.shape = y.shape;
  out.data.resize(y.data.size());
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t in = 0; in < inner; ++in) {
      const int64_t base = o * extent * inner + in;
      double dot = 0.0;
      for (int64_t e = 0; e < extent; ++e) dot += g[base + e * inner] * y[base + e * inner];
      for (int64_t e = 0; e < extent; ++e) {
        const int64_t i = base + e * inner;
        out.data[static_cast<size_t>(i)] = y[i] * (g[i] - dot);
      }
    }
  }
  return out;
}

Tensor maxreduce(const Tensor& a, int axis, std::vector<int64_t>* argmax) {
  const int ax = normalize_axis(axis, a.rank(), "maxpool");
  int64_t outer, extent, inner;
  axis_split(a.shape, ax, &outer, &extent, &inner);
  if (extent == 0) raise(ErrorKind::invalid_argument, "maxpool: empty reduction axis");
  Tensor out;
  out.shape = a.shape;
  out.shape.erase(out.shape.begin() + ax);
  out.data.resize(static_cast<size_t>(outer * inner));
  if (argmax) argmax->assign(static_cast<size_t>(outer * inner), 0);
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t in = 0; in < inner; ++in) {
      const int64_t base = o * extent * inner + in;
      double mx = a[base];
      int64_t mi = 0;
      for (int64_t e = 1; e < extent; ++e) {
        double v = a[base + e * inner];
        if (v > mx) {
          mx = v;
          mi = e;
        }
      }
      out.data[static_cast<size_t>(o * inner + in)] = mx;
      if (argmax) (*argmax)[static_cast<size_t>(o * inner + in)] = mi;
    }
  }
  return out;
}

Tensor maxreduce_backward(const Tensor& g, const std::vector<int64_t>& in_shape, int axis,
                          const std::vector<int64_t>& argmax) {
  const int ax = normalize_axis(axis, static_cast<int>(in_shape.size()), "maxpool");
  int64_t outer, extent, inner;
  axis_split(in_shape, ax, &outer, &extent, &inner);
  Tensor out;
  out.shape = in_shape;
  out.data.assign(static_cast<size_t>(shape_numel(in_shape)), 0.0);
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t in = 0; in < inner; ++in) {
      const int64_t flat = o * inner + in;
      const int64_t e = argmax[static_cast<size_t>(flat)];
      out.data[static_cast<size_t>(o * extent * inner + e * inner + in)] = g[flat];
    }
  }
  return out;
}

Tensor layernorm(const Tensor& x, const Tensor& gain, const Tensor& offset, Tensor* xhat_out,
                 Tensor* inv_std_out) {
  if (x.rank() < 1) raise(ErrorKind::invalid_argument, "layernorm: rank-0 input");
  const int64_t k = x.shape.back();
  if (gain.shape != std::vector<int64_t>{k} || offset.shape != std::vector<int64_t>{k}) {
    raise(ErrorKind::invalid_argument, "layernorm: gain/offset must have shape (" +
                                           std::to_string(k) + ")");
  }
  const int64_t rows = x.numel() / k;
  constexpr double kEps = 1e-5;
  Tensor out, xhat, inv_std;
  out.shape = x.shape;
  out.data.resize(x.data.size());
  xhat.shape = x.shape;
  xhat.data.resize(x.data.size());
  inv_std.shape = {rows};
  inv_std.data.resize(static_cast<size_t>(rows));
  for (int64_t r = 0; r < rows; ++r) {
    const int64_t base = r * k;
    double mean = 0.0;
    for (int64_t j = 0; j < k; ++j) mean += x[base + j];
    mean /= static_cast<double>(k);
    double var = 0.0;
    for (int64_t j = 0; j < k; ++j) {
      double c = x[base + j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(k);
    const double istd = 1.0 / std::sqrt(var + kEps);
    inv_std.data[static_cast<size_t>(r)] = istd;
    for (int64_t j = 0; j < k; ++j) {
      double xh = (x[base + j] - mean) * istd;
      xhat.data[static_cast<size_t>(base + j)] = xh;
      out.data[static_cast<size_t>(base + j)] = xh * gain[j] + offset[j];
    }
  }
  ensure_finite(out, "layernorm");
  if (xhat_out) *xhat_out = std::move(xhat);
  if (inv_std_out) *inv_std_out = std::move(inv_std);
  return out;
}

Tensor layernorm_backward(const Tensor& g, const Tensor& xhat, const Tensor& inv_std,
                          const Tensor& gain, Tensor* dgain, Tensor* doffset) {
  const int64_t k = xhat.shape.back();
  const int64_t rows = xhat.numel() / k;
  Tensor dx;
  dx.shape = xhat.shape;
  dx.data.resize(xhat.data.size());
  *dgain = Tensor({k}, 0.0);
  *doffset = Tensor({k}, 0.0);
  for (int64_t r = 0; r < rows; ++r) {
    const int64_t base = r * k;
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (int64_t j = 0; j < k; ++j) {
      const double dxh = g[base + j] * gain[j];
      sum_dxhat += dxh;
      sum_dxhat_xhat += dxh * xhat[base + j];
      (*dgain)[j] += g[base + j] * xhat[base + j];
      (*doffset)[j] += g[base + j];
    }
    const double istd = inv_std[r];
    for (int64_t j = 0; j < k; ++j) {
      const double dxh = g[base + j] * gain[j];
      dx.data[static_cast<size_t>(base + j)] =
          istd * (dxh - (sum_dxhat + xhat[base + j] * sum_dxhat_xhat) / static_cast<double>(k));
    }
  }
  return dx;
}

Tensor sum_all(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data) s += v;
  Tensor out = Tensor::scalar(s);
  ensure_finite(out, "sum");
  return out;
}

void accumulate(Tensor& acc, const Tensor& g) {
  if (!acc.defined()) {
    acc = g;
    return;
  }
  if (!acc.same_shape(g)) {
    raise(ErrorKind::internal, "accumulate: shape mismatch " + shape_to_string(acc.shape) +
                                   " vs " + shape_to_string(g.shape));
  }
  for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += g.data[i];
}

double l2_norm(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data) s += v * v;
  return std::sqrt(s);
}

}  // namespace cadet
