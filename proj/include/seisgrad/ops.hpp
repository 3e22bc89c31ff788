#pragma once

// Primitive operation set of the reverse-mode engine. Every public function
// here computes eagerly and, when a tape is active and recording and at least
// one input lives on it, appends one node carrying the backward rule.

#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

#include "seisgrad/fft.hpp"
#include "seisgrad/misfit/sinkhorn_kernel.hpp"
#include "seisgrad/misfit/softdtw_kernel.hpp"
#include "seisgrad/tape.hpp"
#include "seisgrad/tensor.hpp"

namespace seisgrad {

namespace detail {

inline void check_finite(const Tensor& t, const char* opname) {
  if (!t.all_finite())
    throw NumericalError(std::string("non-finite output of '") + opname + "'");
}

inline NodeArg arg_of(const Tensor& t) { return NodeArg{t.node(), t.detached()}; }

inline bool any_on_tape(const std::vector<NodeArg>& args) {
  for (const auto& a : args)
    if (a.id >= 0) return true;
  return false;
}

// Registers the node if a tape is recording; returns `out` with its handle.
inline Tensor finish(Op op, const char* name, Tensor out,
                     std::vector<NodeArg> args, double p0 = 0, double p1 = 0,
                     double p2 = 0, std::int64_t i0 = 0, std::int64_t i1 = 0,
                     IndexList idx = nullptr, std::vector<Tensor> saved = {}) {
  check_finite(out, name);
  Tape* t = active_tape();
  if (t && t->recording() && any_on_tape(args)) {
    TapeNode n;
    n.op = op;
    n.out = out.detached();
    n.in = std::move(args);
    n.p0 = p0;
    n.p1 = p1;
    n.p2 = p2;
    n.i0 = i0;
    n.i1 = i1;
    n.idx = std::move(idx);
    n.saved = std::move(saved);
    out.set_node(t->push(std::move(n)));
  }
  return out;
}

enum class Bin { add, sub, mul, div };

inline double apply_bin(Bin k, double a, double b) {
  switch (k) {
    case Bin::add: return a + b;
    case Bin::sub: return a - b;
    case Bin::mul: return a * b;
    case Bin::div: return a / b;
  }
  return 0;
}

// Elementwise binary with scalar broadcast on either side. "General
// broadcasting" is out of scope; only numel-1 operands broadcast.
inline Tensor ew_binary(Bin k, Op op, const char* name, const Tensor& a,
                        const Tensor& b) {
  Tensor out;
  if (a.shape() == b.shape()) {
    out = Tensor::zeros(a.shape());
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    const std::int64_t n = a.numel();
    switch (k) {
      case Bin::add:
        for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
        break;
      case Bin::sub:
        for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
        break;
      case Bin::mul:
        for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
        break;
      case Bin::div:
        for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] / pb[i];
        break;
    }
  } else if (a.numel() == 1) {
    out = Tensor::zeros(b.shape());
    const double av = a[0];
    const double* pb = b.data();
    double* po = out.data();
    for (std::int64_t i = 0; i < b.numel(); ++i) po[i] = apply_bin(k, av, pb[i]);
  } else if (b.numel() == 1) {
    out = Tensor::zeros(a.shape());
    const double bv = b[0];
    const double* pa = a.data();
    double* po = out.data();
    for (std::int64_t i = 0; i < a.numel(); ++i) po[i] = apply_bin(k, pa[i], bv);
  } else {
    throw ValidationError(std::string(name) + ": shape mismatch " +
                          a.shape().str() + " vs " + b.shape().str());
  }
  return finish(op, name, std::move(out), {arg_of(a), arg_of(b)});
}

template <class F>
inline Tensor ew_unary(Op op, const char* name, const Tensor& a, F f,
                       double p0 = 0, double p1 = 0) {
  Tensor out = Tensor::zeros(a.shape());
  const double* pa = a.data();
  double* po = out.data();
  for (std::int64_t i = 0; i < a.numel(); ++i) po[i] = f(pa[i]);
  return finish(op, name, std::move(out), {arg_of(a)}, p0, p1);
}

inline Tensor ew_mul_fresh(const Tensor& a, const Tensor& b) {
  Tensor out = Tensor::zeros(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (std::int64_t i = 0; i < a.numel(); ++i) po[i] = pa[i] * pb[i];
  return out;
}

inline Tensor smul_fresh(const Tensor& a, double c) {
  Tensor out = Tensor::zeros(a.shape());
  const double* pa = a.data();
  double* po = out.data();
  for (std::int64_t i = 0; i < a.numel(); ++i) po[i] = pa[i] * c;
  return out;
}

inline double dot_raw(const Tensor& a, const Tensor& b) {
  const double* pa = a.data();
  const double* pb = b.data();
  double s = 0;
  for (std::int64_t i = 0; i < a.numel(); ++i) s += pa[i] * pb[i];
  return s;
}

inline double sum_raw(const Tensor& a) {
  const double* pa = a.data();
  double s = 0;
  for (std::int64_t i = 0; i < a.numel(); ++i) s += pa[i];
  return s;
}

inline Tensor shift2d_raw(const Tensor& x, int axis, std::int64_t off) {
  const std::int64_t R = x.rows(), C = x.cols();
  Tensor out = Tensor::zeros(x.shape());
  if (axis == 0) {
    for (std::int64_t r = 0; r < R; ++r) {
      const std::int64_t s = r + off;
      if (s < 0 || s >= R) continue;
      std::memcpy(out.data() + r * C, x.data() + s * C, sizeof(double) * C);
    }
  } else {
    for (std::int64_t r = 0; r < R; ++r) {
      const double* src = x.data() + r * C;
      double* dst = out.data() + r * C;
      for (std::int64_t c = 0; c < C; ++c) {
        const std::int64_t s = c + off;
        dst[c] = (s >= 0 && s < C) ? src[s] : 0.0;
      }
    }
  }
  return out;
}

// Taylor staggered-grid first-derivative coefficients.
inline std::span<const double> stencil_coeffs(int order) {
  static const double c4[] = {9.0 / 8.0, -1.0 / 24.0};
  static const double c6[] = {75.0 / 64.0, -25.0 / 384.0, 3.0 / 640.0};
  static const double c8[] = {1225.0 / 1024.0, -245.0 / 3072.0, 49.0 / 5120.0,
                              -5.0 / 7168.0};
  switch (order) {
    case 4: return {c4, 2};
    case 6: return {c6, 3};
    case 8: return {c8, 4};
    default: throw ValidationError("stencil: order must be 4, 6 or 8");
  }
}

// half = 0: derivative at i+1/2 nodes, out[i] = sum_k c_k (x[i+k] - x[i-k+1])
// half = 1: derivative at i     nodes, out[i] = sum_k c_k (x[i+k-1] - x[i-k])
inline Tensor stencil2d_raw(const Tensor& x, int axis, int half, int order,
                            double inv_dx) {
  const auto cs = stencil_coeffs(order);
  const std::int64_t K = static_cast<std::int64_t>(cs.size());
  const std::int64_t R = x.rows(), C = x.cols();
  Tensor out = Tensor::zeros(x.shape());
  const double* px = x.data();
  double* po = out.data();
  const std::int64_t N = (axis == 0) ? R : C;
  auto hi_off = [&](std::int64_t k) { return half == 0 ? k : k - 1; };
  auto lo_off = [&](std::int64_t k) { return half == 0 ? 1 - k : -k; };
  if (axis == 0) {
    for (std::int64_t r = 0; r < R; ++r) {
      double* orow = po + r * C;
      for (std::int64_t k = 1; k <= K; ++k) {
        const double ck = cs[k - 1] * inv_dx;
        const std::int64_t rh = r + hi_off(k);
        const std::int64_t rl = r + lo_off(k);
        if (rh >= 0 && rh < N) {
          const double* s = px + rh * C;
          for (std::int64_t c = 0; c < C; ++c) orow[c] += ck * s[c];
        }
        if (rl >= 0 && rl < N) {
          const double* s = px + rl * C;
          for (std::int64_t c = 0; c < C; ++c) orow[c] -= ck * s[c];
        }
      }
    }
  } else {
    for (std::int64_t r = 0; r < R; ++r) {
      const double* xrow = px + r * C;
      double* orow = po + r * C;
      for (std::int64_t k = 1; k <= K; ++k) {
        const double ck = cs[k - 1] * inv_dx;
        const std::int64_t oh = hi_off(k), ol = lo_off(k);
        const std::int64_t h0 = std::max<std::int64_t>(0, -oh);
        const std::int64_t h1 = std::min<std::int64_t>(C, C - oh);
        for (std::int64_t c = h0; c < h1; ++c) orow[c] += ck * xrow[c + oh];
        const std::int64_t l0 = std::max<std::int64_t>(0, -ol);
        const std::int64_t l1 = std::min<std::int64_t>(C, C - ol);
        for (std::int64_t c = l0; c < l1; ++c) orow[c] -= ck * xrow[c + ol];
      }
    }
  }
  return out;
}

inline Tensor conv2d_raw(const Tensor& x, const Tensor& k, double bias) {
  const std::int64_t H = x.rows(), W = x.cols();
  const std::int64_t kh = k.rows(), kw = k.cols();
  const std::int64_t pt = (kh - 1) / 2, pl = (kw - 1) / 2;
  Tensor out = Tensor::full(x.shape(), bias);
  for (std::int64_t ky = 0; ky < kh; ++ky) {
    for (std::int64_t kx = 0; kx < kw; ++kx) {
      const double kv = k.at(ky, kx);
      if (kv == 0.0) continue;
      const std::int64_t dy = ky - pt, dx = kx - pl;
      const std::int64_t y0 = std::max<std::int64_t>(0, -dy);
      const std::int64_t y1 = std::min<std::int64_t>(H, H - dy);
      const std::int64_t x0 = std::max<std::int64_t>(0, -dx);
      const std::int64_t x1 = std::min<std::int64_t>(W, W - dx);
      for (std::int64_t y = y0; y < y1; ++y) {
        const double* src = x.data() + (y + dy) * W + dx;
        double* dst = out.data() + y * W;
        for (std::int64_t c = x0; c < x1; ++c) dst[c] += kv * src[c];
      }
    }
  }
  return out;
}

inline std::vector<double> softmin3_weights(double a, double b, double c,
                                            double gamma) {
  if (gamma == 0.0) {
    if (a <= b && a <= c) return {1, 0, 0};
    if (b <= c) return {0, 1, 0};
    return {0, 0, 1};
  }
  double m = std::min(a, std::min(b, c));
  const double ea = std::exp((m - a) / gamma);
  const double eb = std::exp((m - b) / gamma);
  const double ec = std::exp((m - c) / gamma);
  const double s = ea + eb + ec;
  return {ea / s, eb / s, ec / s};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// elementwise arithmetic

inline Tensor add(const Tensor& a, const Tensor& b) {
  return detail::ew_binary(detail::Bin::add, Op::add, "add", a, b);
}
inline Tensor sub(const Tensor& a, const Tensor& b) {
  return detail::ew_binary(detail::Bin::sub, Op::sub, "sub", a, b);
}
inline Tensor mul(const Tensor& a, const Tensor& b) {
  return detail::ew_binary(detail::Bin::mul, Op::mul, "mul", a, b);
}
inline Tensor div(const Tensor& a, const Tensor& b) {
  return detail::ew_binary(detail::Bin::div, Op::div, "div", a, b);
}

inline Tensor neg(const Tensor& a) {
  return detail::ew_unary(Op::neg, "neg", a, [](double v) { return -v; });
}

inline Tensor smul(const Tensor& a, double c) {
  return detail::ew_unary(Op::smul, "smul", a, [c](double v) { return v * c; },
                          c);
}

inline Tensor pow(const Tensor& a, double p) {
  if (p == 1.0)
    return detail::ew_unary(Op::pow, "pow", a, [](double v) { return v; }, p);
  if (p == 2.0)
    return detail::ew_unary(Op::pow, "pow", a, [](double v) { return v * v; },
                            p);
  return detail::ew_unary(Op::pow, "pow", a,
                          [p](double v) { return std::pow(v, p); }, p);
}

inline Tensor sqrt(const Tensor& a) {
  return detail::ew_unary(Op::sqrt, "sqrt", a,
                          [](double v) { return std::sqrt(v); });
}
inline Tensor exp(const Tensor& a) {
  return detail::ew_unary(Op::exp, "exp", a,
                          [](double v) { return std::exp(v); });
}
inline Tensor log(const Tensor& a) {
  return detail::ew_unary(Op::log, "log", a,
                          [](double v) { return std::log(v); });
}
inline Tensor abs(const Tensor& a) {
  return detail::ew_unary(Op::abs, "abs", a,
                          [](double v) { return std::abs(v); });
}
inline Tensor tanh(const Tensor& a) {
  return detail::ew_unary(Op::tanh, "tanh", a,
                          [](double v) { return std::tanh(v); });
}

inline Tensor leaky_relu(const Tensor& a, double slope) {
  return detail::ew_unary(Op::leaky_relu, "leaky_relu", a,
                          [slope](double v) { return v > 0 ? v : slope * v; },
                          slope);
}

inline Tensor clamp(const Tensor& a, double lo, double hi) {
  require(lo < hi, "clamp: lo must be < hi");
  return detail::ew_unary(Op::clamp, "clamp", a,
                          [lo, hi](double v) { return std::min(std::max(v, lo), hi); },
                          lo, hi);
}

// ---------------------------------------------------------------------------
// reductions and linear algebra

inline Tensor sum(const Tensor& a) {
  Tensor out = Tensor::scalar(detail::sum_raw(a));
  return detail::finish(Op::sum, "sum", std::move(out), {detail::arg_of(a)});
}

inline Tensor mean(const Tensor& a) {
  Tensor out = Tensor::scalar(detail::sum_raw(a) / static_cast<double>(a.numel()));
  return detail::finish(Op::mean, "mean", std::move(out), {detail::arg_of(a)});
}

inline Tensor dot(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "dot: shape mismatch");
  Tensor out = Tensor::scalar(detail::dot_raw(a, b));
  return detail::finish(Op::dot, "dot", std::move(out),
                        {detail::arg_of(a), detail::arg_of(b)});
}

// (m,n) x (n)  -> (m)   |   (m,n) x (n,k) -> (m,k)
inline Tensor matmul(const Tensor& A, const Tensor& B) {
  require(A.shape().rank() == 2, "matmul: left operand must be 2-D");
  const std::int64_t m = A.rows(), n = A.cols();
  Tensor out;
  if (B.shape().rank() == 1) {
    require(B.numel() == n, "matmul: inner dimension mismatch");
    out = Tensor::zeros(Shape::vec(m));
    for (std::int64_t i = 0; i < m; ++i) {
      const double* ar = A.data() + i * n;
      double s = 0;
      for (std::int64_t j = 0; j < n; ++j) s += ar[j] * B[j];
      out[i] = s;
    }
  } else {
    require(B.rows() == n, "matmul: inner dimension mismatch");
    const std::int64_t k = B.cols();
    out = Tensor::zeros(Shape::mat(m, k));
    for (std::int64_t i = 0; i < m; ++i) {
      const double* ar = A.data() + i * n;
      double* orow = out.data() + i * k;
      for (std::int64_t j = 0; j < n; ++j) {
        const double av = ar[j];
        if (av == 0.0) continue;
        const double* br = B.data() + j * k;
        for (std::int64_t c = 0; c < k; ++c) orow[c] += av * br[c];
      }
    }
  }
  return detail::finish(Op::matmul, "matmul", std::move(out),
                        {detail::arg_of(A), detail::arg_of(B)});
}

// out = W x + b, W (out,in), x (in), b (out)
inline Tensor dense(const Tensor& x, const Tensor& W, const Tensor& b) {
  require(x.shape().rank() == 1 && W.shape().rank() == 2 &&
              b.shape().rank() == 1,
          "dense: expects x (in), W (out,in), b (out)");
  const std::int64_t in = x.numel(), out_n = W.rows();
  require(W.cols() == in && b.numel() == out_n, "dense: dimension mismatch");
  Tensor out = Tensor::zeros(Shape::vec(out_n));
  for (std::int64_t o = 0; o < out_n; ++o) {
    const double* wr = W.data() + o * in;
    double s = b[o];
    for (std::int64_t i = 0; i < in; ++i) s += wr[i] * x[i];
    out[o] = s;
  }
  return detail::finish(Op::dense, "dense", std::move(out),
                        {detail::arg_of(x), detail::arg_of(W), detail::arg_of(b)});
}

// ---------------------------------------------------------------------------
// structural ops

inline Tensor reshape(const Tensor& a, const Shape& s) {
  require(s.numel() == a.numel(), "reshape: element count mismatch");
  Tensor out = Tensor::from(s, a.values());
  return detail::finish(Op::reshape, "reshape", std::move(out),
                        {detail::arg_of(a)});
}

inline Tensor gather(const Tensor& a, IndexList idx) {
  const auto& ix = *idx;
  Tensor out = Tensor::zeros(Shape::vec(static_cast<std::int64_t>(ix.size())));
  const std::int64_t n = a.numel();
  for (std::size_t i = 0; i < ix.size(); ++i) {
    require(ix[i] >= 0 && ix[i] < n, "gather: index out of range");
    out[static_cast<std::int64_t>(i)] = a[ix[i]];
  }
  return detail::finish(Op::gather, "gather", std::move(out),
                        {detail::arg_of(a)}, 0, 0, 0, 0, 0, std::move(idx));
}

inline Tensor scatter_add(const Tensor& base, IndexList idx,
                          const Tensor& values) {
  const auto& ix = *idx;
  require(values.numel() == static_cast<std::int64_t>(ix.size()),
          "scatter_add: values/index size mismatch");
  Tensor out = base.clone();
  const std::int64_t n = out.numel();
  for (std::size_t i = 0; i < ix.size(); ++i) {
    require(ix[i] >= 0 && ix[i] < n, "scatter_add: index out of range");
    out[ix[i]] += values[static_cast<std::int64_t>(i)];
  }
  return detail::finish(Op::scatter_add, "scatter_add", std::move(out),
                        {detail::arg_of(base), detail::arg_of(values)}, 0, 0, 0,
                        0, 0, std::move(idx));
}

// out[i] = x[i + offset] along `axis`, zero at the pushed-out boundary.
inline Tensor shift2d(const Tensor& x, int axis, std::int64_t offset) {
  require(x.shape().rank() == 2, "shift2d: expects a 2-D tensor");
  require(axis == 0 || axis == 1, "shift2d: axis must be 0 or 1");
  Tensor out = detail::shift2d_raw(x, axis, offset);
  return detail::finish(Op::shift2d, "shift2d", std::move(out),
                        {detail::arg_of(x)}, 0, 0, 0, axis, offset);
}

// Fused staggered first-derivative stencil (order 4/6/8), zero beyond edges.
// half = 0 evaluates at the +1/2 positions, half = 1 at integer positions.
inline Tensor stencil2d(const Tensor& x, int axis, int half, int order,
                        double inv_dx) {
  require(x.shape().rank() == 2, "stencil2d: expects a 2-D tensor");
  require(axis == 0 || axis == 1, "stencil2d: axis must be 0 or 1");
  require(half == 0 || half == 1, "stencil2d: half must be 0 or 1");
  Tensor out = detail::stencil2d_raw(x, axis, half, order, inv_dx);
  return detail::finish(Op::stencil2d, "stencil2d", std::move(out),
                        {detail::arg_of(x)}, inv_dx, static_cast<double>(order),
                        0, axis, half);
}

inline Tensor upsample2x_nearest(const Tensor& x) {
  require(x.shape().rank() == 2, "upsample2x: expects a 2-D tensor");
  const std::int64_t H = x.rows(), W = x.cols();
  Tensor out = Tensor::zeros(Shape::mat(2 * H, 2 * W));
  for (std::int64_t r = 0; r < H; ++r) {
    const double* src = x.data() + r * W;
    double* d0 = out.data() + (2 * r) * 2 * W;
    double* d1 = out.data() + (2 * r + 1) * 2 * W;
    for (std::int64_t c = 0; c < W; ++c) {
      d0[2 * c] = d0[2 * c + 1] = src[c];
      d1[2 * c] = d1[2 * c + 1] = src[c];
    }
  }
  return detail::finish(Op::upsample2x, "upsample2x", std::move(out),
                        {detail::arg_of(x)});
}

// 4x4 kernel, stride 1, zero pad preserving shape; optional scalar bias.
inline Tensor conv2d(const Tensor& x, const Tensor& k, const Tensor& bias = {}) {
  require(x.shape().rank() == 2 && k.shape().rank() == 2,
          "conv2d: expects 2-D input and kernel");
  const double bv = bias.empty() ? 0.0 : bias.scalar_value();
  Tensor out = detail::conv2d_raw(x, k, bv);
  std::vector<NodeArg> args{detail::arg_of(x), detail::arg_of(k)};
  if (!bias.empty()) args.push_back(detail::arg_of(bias));
  return detail::finish(Op::conv2d, "conv2d", std::move(out), std::move(args));
}

// Elementwise product with a precomputed (inverted-dropout scaled) mask. The
// mask is a constant: it is never differentiated.
inline Tensor dropout(const Tensor& x, const Tensor& mask) {
  require(x.shape() == mask.shape(), "dropout: mask shape mismatch");
  Tensor out = detail::ew_mul_fresh(x, mask);
  return detail::finish(Op::dropout, "dropout", std::move(out),
                        {detail::arg_of(x)}, 0, 0, 0, 0, 0, nullptr,
                        {mask.detached()});
}

// Stacks n equal-length vectors into an (n, m) matrix.
inline Tensor stack_rows(std::span<const Tensor> rows) {
  require(!rows.empty(), "stack_rows: no rows");
  const std::int64_t m = rows[0].numel();
  Tensor out = Tensor::zeros(Shape::mat(static_cast<std::int64_t>(rows.size()), m));
  std::vector<NodeArg> args;
  args.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r].numel() == m, "stack_rows: ragged rows");
    std::memcpy(out.data() + static_cast<std::int64_t>(r) * m, rows[r].data(),
                sizeof(double) * m);
    args.push_back(detail::arg_of(rows[r]));
  }
  return detail::finish(Op::stack_rows, "stack_rows", std::move(out),
                        std::move(args));
}

// ---------------------------------------------------------------------------
// analytic-signal and soft-min primitives

inline Tensor hilbert_analytic(const Tensor& x) {
  require(x.shape().rank() == 1, "hilbert: expects a 1-D tensor");
  auto h = fftutil::hilbert(x.values(), false);
  Tensor out = Tensor::from(x.shape(), h);
  return detail::finish(Op::hilbert, "hilbert", std::move(out),
                        {detail::arg_of(x)});
}

inline Tensor softmin3(const Tensor& a, const Tensor& b, const Tensor& c,
                       double gamma) {
  require(gamma >= 0.0, "softmin3: gamma must be >= 0");
  require(a.shape() == b.shape() && b.shape() == c.shape(),
          "softmin3: shape mismatch");
  Tensor out = Tensor::zeros(a.shape());
  for (std::int64_t i = 0; i < a.numel(); ++i)
    out[i] = softdtw::soft_min3(a[i], b[i], c[i], gamma);
  return detail::finish(Op::softmin3, "softmin3", std::move(out),
                        {detail::arg_of(a), detail::arg_of(b), detail::arg_of(c)},
                        gamma);
}

// ---------------------------------------------------------------------------
// composite per-trace misfit nodes. These fold an O(n*m) dynamic program /
// fixed-point solve into a single node with an exact hand-derived backward;
// unrolling them as elementwise primitives would put ~n*m nodes per trace on
// the tape.

inline Tensor softdtw_pair(const Tensor& x, const Tensor& y, double gamma) {
  require(x.shape().rank() == 1 && y.shape().rank() == 1,
          "softdtw: expects 1-D traces");
  softdtw::Result r = softdtw::forward(x.values(), y.values(), gamma);
  Tensor out = Tensor::scalar(r.value);
  std::vector<Tensor> saved;
  saved.push_back(Tensor::from(
      Shape::vec(static_cast<std::int64_t>(r.R.size())), r.R));
  if (gamma == 0.0)
    saved.push_back(Tensor::from(
        Shape::vec(static_cast<std::int64_t>(r.choice.size())), r.choice));
  return detail::finish(Op::softdtw_pair, "softdtw_pair", std::move(out),
                        {detail::arg_of(x), detail::arg_of(y)}, gamma, 0, 0, 0,
                        0, nullptr, std::move(saved));
}

namespace detail {

// d(nu)/d(x) chain for the shift-normalize map
//   nu = (x + c) / S,  c = -min(x) + 0.1 (max(x) - min(x)),  S = sum(x + c).
// Returns (d nu/d x)^T G. Constant traces map to the uniform distribution with
// zero gradient.
inline void shift_normalize(std::span<const double> x, std::vector<double>& nu,
                            double& S, double& c, bool& degenerate) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  double mn = x[0], mx = x[0];
  for (std::int64_t i = 1; i < n; ++i) {
    mn = std::min(mn, x[i]);
    mx = std::max(mx, x[i]);
  }
  const double range = mx - mn;
  nu.resize(n);
  degenerate = !(range > 0.0);
  if (degenerate) {
    c = 0;
    S = static_cast<double>(n);
    for (std::int64_t i = 0; i < n; ++i) nu[i] = 1.0 / static_cast<double>(n);
    return;
  }
  c = -mn + 0.1 * range;
  S = 0;
  for (std::int64_t i = 0; i < n; ++i) S += x[i] + c;
  for (std::int64_t i = 0; i < n; ++i) nu[i] = (x[i] + c) / S;
}

inline std::vector<double> shift_normalize_vjp(std::span<const double> x,
                                               std::span<const double> G) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  std::vector<double> out(n, 0.0);
  std::int64_t imin = 0, imax = 0;
  for (std::int64_t i = 1; i < n; ++i) {
    if (x[i] < x[imin]) imin = i;
    if (x[i] > x[imax]) imax = i;
  }
  const double range = x[imax] - x[imin];
  if (!(range > 0.0)) return out;
  const double c = -x[imin] + 0.1 * range;
  double S = 0, sumG = 0, sG = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    S += x[i] + c;
    sumG += G[i];
    sG += G[i] * (x[i] + c);
  }
  const double nd = static_cast<double>(n);
  for (std::int64_t j = 0; j < n; ++j) {
    double dc = 0.0;
    if (j == imin) dc += -1.0 - 0.1;
    if (j == imax) dc += 0.1;
    out[j] = G[j] / S + dc * sumG / S - (1.0 + nd * dc) * sG / (S * S);
  }
  return out;
}

}  // namespace detail

struct SinkhornOptions {
  double lambda = 0.0;  // <= 0: auto, lambda * median(cost) ~ 1
  int max_iters = 1000;
  bool debias = true;
  double tol = 1e-9;
};

// Entropic transport misfit between two raw traces. Both are shift-normalized
// onto the simplex; the ground cost lives on the time axis. With debias on the
// value is the Sinkhorn divergence W(mu,nu) - (W(mu,mu) + W(nu,nu))/2.
inline Tensor sinkhorn_pair(const Tensor& cal, const Tensor& obs,
                            const std::shared_ptr<const sinkhorn::Kernel>& kern,
                            const SinkhornOptions& opt) {
  require(cal.shape().rank() == 1 && obs.shape().rank() == 1,
          "sinkhorn: expects 1-D traces");
  require(cal.numel() == kern->n && obs.numel() == kern->n,
          "sinkhorn: trace length does not match kernel");
  std::vector<double> mu, nu;
  double Sm, Sn, cm, cn;
  bool degm, degn;
  detail::shift_normalize(obs.values(), mu, Sm, cm, degm);
  detail::shift_normalize(cal.values(), nu, Sn, cn, degn);

  auto run = [&](std::span<const double> a, std::span<const double> b) {
    sinkhorn::Solution s = sinkhorn::solve(a, b, *kern, opt.max_iters, opt.tol);
    if (!s.converged)
      throw NumericalError(
          "sinkhorn: no convergence after " + std::to_string(s.iters) +
          " iterations (marginal error " + std::to_string(s.marginal_err) + ")");
    return s;
  };

  sinkhorn::Solution s_mn = run(mu, nu);
  double value = s_mn.value;
  std::vector<double> gnu = s_mn.g;  // dW/dnu
  if (opt.debias) {
    sinkhorn::Solution s_mm = run(mu, mu);
    sinkhorn::Solution s_nn = run(nu, nu);
    value -= 0.5 * (s_mm.value + s_nn.value);
    for (std::int64_t i = 0; i < kern->n; ++i)
      gnu[i] -= 0.5 * (s_nn.f[i] + s_nn.g[i]);
  }

  Tensor out = Tensor::scalar(value);
  std::vector<Tensor> saved;
  Tape* t = active_tape();
  if (t && t->recording() && cal.on_tape()) {
    std::vector<double> gcal =
        degn ? std::vector<double>(kern->n, 0.0)
             : detail::shift_normalize_vjp(cal.values(), gnu);
    saved.push_back(Tensor::from(Shape::vec(kern->n), gcal));
  }
  return detail::finish(Op::sinkhorn_pair, "sinkhorn_pair", std::move(out),
                        {detail::arg_of(cal), detail::arg_of(obs)}, 0, 0, 0, 0,
                        0, nullptr, std::move(saved));
}

// ---------------------------------------------------------------------------
// backward rules

namespace detail {

using Emit = std::function<void(std::int64_t, Tensor&&)>;

inline void emit_if(const Emit& emit, const NodeArg& a, Tensor&& g) {
  if (a.id >= 0) emit(a.id, std::move(g));
}

// gradient of a broadcast binary op onto one operand
inline Tensor reduce_to(const Shape& target, const Tensor& g) {
  if (g.shape() == target) return g.clone();
  // target is the scalar side
  Tensor out = Tensor::zeros(target);
  out[0] = sum_raw(g);
  return out;
}

inline void op_backward(const TapeNode& n, const Tensor& g, const Emit& emit) {
  const auto& in = n.in;
  switch (n.op) {
    case Op::leaf:
      break;
    case Op::add: {
      emit_if(emit, in[0], reduce_to(in[0].val.shape(), g));
      emit_if(emit, in[1], reduce_to(in[1].val.shape(), g));
      break;
    }
    case Op::sub: {
      emit_if(emit, in[0], reduce_to(in[0].val.shape(), g));
      if (in[1].id >= 0) {
        Tensor gb = reduce_to(in[1].val.shape(), g);
        for (std::int64_t i = 0; i < gb.numel(); ++i) gb[i] = -gb[i];
        emit(in[1].id, std::move(gb));
      }
      break;
    }
    case Op::mul: {
      const Tensor& a = in[0].val;
      const Tensor& b = in[1].val;
      if (in[0].id >= 0) {
        if (a.shape() == g.shape()) {
          if (b.numel() == 1)
            emit(in[0].id, smul_fresh(g, b[0]));
          else
            emit(in[0].id, ew_mul_fresh(g, b));
        } else {  // a is scalar
          Tensor ga = Tensor::zeros(a.shape());
          ga[0] = dot_raw(g, b);
          emit(in[0].id, std::move(ga));
        }
      }
      if (in[1].id >= 0) {
        if (b.shape() == g.shape()) {
          if (a.numel() == 1)
            emit(in[1].id, smul_fresh(g, a[0]));
          else
            emit(in[1].id, ew_mul_fresh(g, a));
        } else {
          Tensor gb = Tensor::zeros(b.shape());
          gb[0] = dot_raw(g, a);
          emit(in[1].id, std::move(gb));
        }
      }
      break;
    }
    case Op::div: {
      const Tensor& a = in[0].val;
      const Tensor& b = in[1].val;
      const Tensor& o = n.out;
      if (in[0].id >= 0) {
        if (a.shape() == g.shape()) {
          Tensor ga = Tensor::zeros(a.shape());
          for (std::int64_t i = 0; i < ga.numel(); ++i)
            ga[i] = g[i] / (b.numel() == 1 ? b[0] : b[i]);
          emit(in[0].id, std::move(ga));
        } else {
          Tensor ga = Tensor::zeros(a.shape());
          double s = 0;
          for (std::int64_t i = 0; i < g.numel(); ++i) s += g[i] / b[i];
          ga[0] = s;
          emit(in[0].id, std::move(ga));
        }
      }
      if (in[1].id >= 0) {
        if (b.shape() == g.shape()) {
          Tensor gb = Tensor::zeros(b.shape());
          for (std::int64_t i = 0; i < gb.numel(); ++i)
            gb[i] = -g[i] * o[i] / b[i];
          emit(in[1].id, std::move(gb));
        } else {
          Tensor gb = Tensor::zeros(b.shape());
          double s = 0;
          for (std::int64_t i = 0; i < g.numel(); ++i)
            s += -g[i] * o[i] / b[0];
          gb[0] = s;
          emit(in[1].id, std::move(gb));
        }
      }
      break;
    }
    case Op::neg: {
      Tensor ga = smul_fresh(g, -1.0);
      emit_if(emit, in[0], std::move(ga));
      break;
    }
    case Op::smul: {
      emit_if(emit, in[0], smul_fresh(g, n.p0));
      break;
    }
    case Op::pow: {
      const Tensor& a = in[0].val;
      const double p = n.p0;
      Tensor ga = Tensor::zeros(a.shape());
      if (p == 1.0) {
        for (std::int64_t i = 0; i < a.numel(); ++i) ga[i] = g[i];
      } else if (p == 2.0) {
        for (std::int64_t i = 0; i < a.numel(); ++i) ga[i] = g[i] * 2.0 * a[i];
      } else {
        for (std::int64_t i = 0; i < a.numel(); ++i)
          ga[i] = g[i] * p * std::pow(a[i], p - 1.0);
      }
      emit_if(emit, in[0], std::move(ga));
      break;
    }
    case Op::sqrt: {
      Tensor ga = Tensor::zeros(g.shape());
      for (std::int64_t i = 0; i < g.numel(); ++i)
        ga[i] = 0.5 * g[i] / n.out[i];
      emit_if(emit, in[0], std::move(ga));
      break;
    }
    case Op::exp: {
      emit_if(emit, in[0], ew_mul_fresh(g, n.out));
      break;
    }
    case Op::log: {
      Tensor ga = Tensor::zeros(g.shape());
      const Tensor& a = in[0].val;
      for (std::int64_t i = 0; i < g.numel(); ++i) ga[i] = g[i] / a[i];
      emit_if(emit, in[0], std::move(ga));
      break;
    }
    case Op::abs: {
      Tensor ga = Tensor::zeros(g.shape());
      const Tensor& a = in[0].val;
      for (std::int64_t i = 0; i < g.numel(); ++i) {
        const double s = a[i] > 0 ? 1.0 : (a[i] < 0 ? -1.0 : 0.0);
        ga[i] = g[i] * s;
      }
      emit_if(emit, in[0], std::move(ga));
      break;
    }
    case Op::tanh: {
      Tensor ga = Tensor::zeros(g.shape());
      for (std::int64_t i = 0; i < g.numel(); ++i)
        ga[i] = g[i] * (1.0 - n.out[i] * n.out[i]);
      emit_if(emit, in[0], std::move(ga));
      break;
    }
    case Op::leaky_relu: {
      Tensor ga = Tensor::zeros(g.shape());
      const Tensor& a = in[0].val;
      for (std::int64_t i = 0; i < g.numel(); ++i)
        ga[i] = g[i] * (a[i] > 0 ? 1.0 : n.p0);
      emit_if(emit, in[0], std::move(ga));
      break;
    }
    case Op::clamp: {
      Tensor ga = Tensor::zeros(g.shape());
      const Tensor& a = in[0].val;
      for (std::int64_t i = 0; i < g.numel(); ++i)
        ga[i] = (a[i] >= n.p0 && a[i] <= n.p1) ? g[i] : 0.0;
      emit_if(emit, in[0], std::move(ga));
      break;
    }
    case Op::sum: {
      emit_if(emit, in[0], Tensor::full(in[0].val.shape(), g[0]));
      break;
    }
    case Op::mean: {
      emit_if(emit, in[0],
              Tensor::full(in[0].val.shape(),
                           g[0] / static_cast<double>(in[0].val.numel())));
      break;
    }
    case Op::dot: {
      emit_if(emit, in[0], smul_fresh(in[1].val, g[0]));
      emit_if(emit, in[1], smul_fresh(in[0].val, g[0]));
      break;
    }
    case Op::matmul: {
      const Tensor& A = in[0].val;
      const Tensor& B = in[1].val;
      const std::int64_t m = A.rows(), nn = A.cols();
      if (B.shape().rank() == 1) {
        if (in[0].id >= 0) {
          Tensor gA = Tensor::zeros(A.shape());
          for (std::int64_t i = 0; i < m; ++i) {
            const double gi = g[i];
            double* row = gA.data() + i * nn;
            for (std::int64_t j = 0; j < nn; ++j) row[j] = gi * B[j];
          }
          emit(in[0].id, std::move(gA));
        }
        if (in[1].id >= 0) {
          Tensor gx = Tensor::zeros(B.shape());
          for (std::int64_t i = 0; i < m; ++i) {
            const double gi = g[i];
            const double* ar = A.data() + i * nn;
            for (std::int64_t j = 0; j < nn; ++j) gx[j] += gi * ar[j];
          }
          emit(in[1].id, std::move(gx));
        }
      } else {
        const std::int64_t k = B.cols();
        if (in[0].id >= 0) {
          Tensor gA = Tensor::zeros(A.shape());
          for (std::int64_t i = 0; i < m; ++i)
            for (std::int64_t j = 0; j < nn; ++j) {
              const double* gr = g.data() + i * k;
              const double* br = B.data() + j * k;
              double s = 0;
              for (std::int64_t c = 0; c < k; ++c) s += gr[c] * br[c];
              gA.at(i, j) = s;
            }
          emit(in[0].id, std::move(gA));
        }
        if (in[1].id >= 0) {
          Tensor gB = Tensor::zeros(B.shape());
          for (std::int64_t i = 0; i < m; ++i) {
            const double* ar = A.data() + i * nn;
            const double* gr = g.data() + i * k;
            for (std::int64_t j = 0; j < nn; ++j) {
              double* br = gB.data() + j * k;
              const double av = ar[j];
              for (std::int64_t c = 0; c < k; ++c) br[c] += av * gr[c];
            }
          }
          emit(in[1].id, std::move(gB));
        }
      }
      break;
    }
    case Op::dense: {
      const Tensor& x = in[0].val;
      const Tensor& W = in[1].val;
      const std::int64_t inn = x.numel(), outn = W.rows();
      if (in[0].id >= 0) {
        Tensor gx = Tensor::zeros(x.shape());
        for (std::int64_t o = 0; o < outn; ++o) {
          const double go = g[o];
          const double* wr = W.data() + o * inn;
          for (std::int64_t i = 0; i < inn; ++i) gx[i] += go * wr[i];
        }
        emit(in[0].id, std::move(gx));
      }
      if (in[1].id >= 0) {
        Tensor gW = Tensor::zeros(W.shape());
        for (std::int64_t o = 0; o < outn; ++o) {
          const double go = g[o];
          double* wr = gW.data() + o * inn;
          for (std::int64_t i = 0; i < inn; ++i) wr[i] = go * x[i];
        }
        emit(in[1].id, std::move(gW));
      }
      if (in[2].id >= 0) emit(in[2].id, g.clone());
      break;
    }
    case Op::conv2d: {
      const Tensor& x = in[0].val;
      const Tensor& k = in[1].val;
      const std::int64_t H = x.rows(), W = x.cols();
      const std::int64_t kh = k.rows(), kw = k.cols();
      const std::int64_t pt = (kh - 1) / 2, pl = (kw - 1) / 2;
      if (in[0].id >= 0) {
        Tensor gx = Tensor::zeros(x.shape());
        for (std::int64_t ky = 0; ky < kh; ++ky)
          for (std::int64_t kx = 0; kx < kw; ++kx) {
            const double kv = k.at(ky, kx);
            if (kv == 0.0) continue;
            const std::int64_t dy = ky - pt, dx = kx - pl;
            const std::int64_t y0 = std::max<std::int64_t>(0, -dy);
            const std::int64_t y1 = std::min<std::int64_t>(H, H - dy);
            const std::int64_t x0 = std::max<std::int64_t>(0, -dx);
            const std::int64_t x1 = std::min<std::int64_t>(W, W - dx);
            for (std::int64_t y = y0; y < y1; ++y) {
              const double* gr = g.data() + y * W;
              double* dst = gx.data() + (y + dy) * W + dx;
              for (std::int64_t c = x0; c < x1; ++c) dst[c] += kv * gr[c];
            }
          }
        emit(in[0].id, std::move(gx));
      }
      if (in[1].id >= 0) {
        Tensor gk = Tensor::zeros(k.shape());
        for (std::int64_t ky = 0; ky < kh; ++ky)
          for (std::int64_t kx = 0; kx < kw; ++kx) {
            const std::int64_t dy = ky - pt, dx = kx - pl;
            const std::int64_t y0 = std::max<std::int64_t>(0, -dy);
            const std::int64_t y1 = std::min<std::int64_t>(H, H - dy);
            const std::int64_t x0 = std::max<std::int64_t>(0, -dx);
            const std::int64_t x1 = std::min<std::int64_t>(W, W - dx);
            double s = 0;
            for (std::int64_t y = y0; y < y1; ++y) {
              const double* gr = g.data() + y * W;
              const double* xr = x.data() + (y + dy) * W + dx;
              for (std::int64_t c = x0; c < x1; ++c) s += gr[c] * xr[c];
            }
            gk.at(ky, kx) = s;
          }
        emit(in[1].id, std::move(gk));
      }
      if (in.size() > 2 && in[2].id >= 0) {
        Tensor gb = Tensor::zeros(in[2].val.shape());
        gb[0] = sum_raw(g);
        emit(in[2].id, std::move(gb));
      }
      break;
    }
    case Op::upsample2x: {
      const Tensor& x = in[0].val;
      const std::int64_t H = x.rows(), W = x.cols();
      Tensor gx = Tensor::zeros(x.shape());
      for (std::int64_t r = 0; r < H; ++r) {
        const double* g0 = g.data() + (2 * r) * 2 * W;
        const double* g1 = g.data() + (2 * r + 1) * 2 * W;
        double* dst = gx.data() + r * W;
        for (std::int64_t c = 0; c < W; ++c)
          dst[c] = g0[2 * c] + g0[2 * c + 1] + g1[2 * c] + g1[2 * c + 1];
      }
      emit_if(emit, in[0], std::move(gx));
      break;
    }
    case Op::dropout: {
      emit_if(emit, in[0], ew_mul_fresh(g, n.saved[0]));
      break;
    }
    case Op::gather: {
      const Tensor& x = in[0].val;
      Tensor gx = Tensor::zeros(x.shape());
      const auto& ix = *n.idx;
      for (std::size_t i = 0; i < ix.size(); ++i)
        gx[ix[i]] += g[static_cast<std::int64_t>(i)];
      emit_if(emit, in[0], std::move(gx));
      break;
    }
    case Op::scatter_add: {
      emit_if(emit, in[0], g.clone());
      if (in[1].id >= 0) {
        const auto& ix = *n.idx;
        Tensor gv = Tensor::zeros(in[1].val.shape());
        for (std::size_t i = 0; i < ix.size(); ++i)
          gv[static_cast<std::int64_t>(i)] = g[ix[i]];
        emit(in[1].id, std::move(gv));
      }
      break;
    }
    case Op::shift2d: {
      emit_if(emit, in[0],
              shift2d_raw(g, static_cast<int>(n.i0), -n.i1));
      break;
    }
    case Op::stencil2d: {
      // adjoint of the +1/2 stencil is the negated integer-node stencil and
      // vice versa
      const int axis = static_cast<int>(n.i0);
      const int half = static_cast<int>(n.i1);
      Tensor ga = stencil2d_raw(g, axis, 1 - half, static_cast<int>(n.p1),
                                -n.p0);
      emit_if(emit, in[0], std::move(ga));
      break;
    }
    case Op::hilbert: {
      auto h = fftutil::hilbert(g.values(), true);
      emit_if(emit, in[0], Tensor::from(g.shape(), h));
      break;
    }
    case Op::softmin3: {
      const Tensor& a = in[0].val;
      const Tensor& b = in[1].val;
      const Tensor& c = in[2].val;
      Tensor ga = Tensor::zeros(a.shape());
      Tensor gb = Tensor::zeros(a.shape());
      Tensor gc = Tensor::zeros(a.shape());
      for (std::int64_t i = 0; i < a.numel(); ++i) {
        const auto w = softmin3_weights(a[i], b[i], c[i], n.p0);
        ga[i] = g[i] * w[0];
        gb[i] = g[i] * w[1];
        gc[i] = g[i] * w[2];
      }
      emit_if(emit, in[0], std::move(ga));
      emit_if(emit, in[1], std::move(gb));
      emit_if(emit, in[2], std::move(gc));
      break;
    }
    case Op::reshape: {
      emit_if(emit, in[0], Tensor::from(in[0].val.shape(), g.values()));
      break;
    }
    case Op::stack_rows: {
      const std::int64_t m = g.cols();
      for (std::size_t r = 0; r < in.size(); ++r) {
        if (in[r].id < 0) continue;
        Tensor gr = Tensor::zeros(Shape::vec(m));
        std::memcpy(gr.data(), g.data() + static_cast<std::int64_t>(r) * m,
                    sizeof(double) * m);
        emit(in[r].id, std::move(gr));
      }
      break;
    }
    case Op::softdtw_pair: {
      const Tensor& x = in[0].val;
      const Tensor& y = in[1].val;
      const double gamma = n.p0;
      Tensor gx = Tensor::zeros(x.shape());
      Tensor gy = Tensor::zeros(y.shape());
      const double* choice = gamma == 0.0 ? n.saved[1].data() : nullptr;
      softdtw::backward(x.values(), y.values(), gamma, n.saved[0].data(),
                        choice, g[0], gx.data(), gy.data());
      emit_if(emit, in[0], std::move(gx));
      emit_if(emit, in[1], std::move(gy));
      break;
    }
    case Op::sinkhorn_pair: {
      if (in[0].id >= 0) {
        // saved[0] holds dW/dcal assembled during the forward solve
        emit(in[0].id, smul_fresh(n.saved[0], g[0]));
      }
      break;
    }
  }
}

inline void accumulate_grad(Tensor& slot, Tensor&& d) {
  if (slot.empty()) {
    slot = std::move(d);
    return;
  }
  double* a = slot.data();
  const double* b = d.data();
  for (std::int64_t i = 0; i < slot.numel(); ++i) a[i] += b[i];
}

}  // namespace detail

// Vector-Jacobian products from explicit cotangent seeds. Processing walks the
// tape in strictly decreasing node order; fan-out accumulation is therefore a
// fixed-order summation and repeated calls are bit-identical.
inline GradientMap backward_seeded(
    const Tape& tape,
    std::span<const std::pair<std::int64_t, Tensor>> seeds,
    std::span<const std::int64_t> leaves) {
  const std::int64_t n = tape.size();
  std::vector<Tensor> grads(static_cast<std::size_t>(n));
  std::int64_t hi = -1;
  for (const auto& [id, s] : seeds) {
    require(id >= 0 && id < n, "backward: seed node not on tape");
    require(s.shape() == tape.node(id).out.shape(),
            "backward: seed shape mismatch at node " + std::to_string(id));
    detail::accumulate_grad(grads[id], s.clone());
    hi = std::max(hi, id);
  }
  std::unordered_set<std::int64_t> want;
  for (auto l : leaves) {
    require(l >= 0 && l < n, "backward: leaf not on tape");
    want.insert(l);
  }
  for (std::int64_t i = hi; i >= 0; --i) {
    if (grads[i].empty()) continue;
    const TapeNode& nd = tape.node(i);
    if (nd.op != Op::leaf) {
      detail::op_backward(nd, grads[i], [&](std::int64_t id, Tensor&& d) {
        detail::accumulate_grad(grads[id], std::move(d));
      });
    }
    if (!want.count(i)) grads[i] = Tensor();
  }
  GradientMap gm;
  for (auto l : leaves) {
    if (grads[l].empty())
      gm.set(l, Tensor::zeros(tape.node(l).out.shape()));
    else
      gm.set(l, grads[l]);
  }
  return gm;
}

// d(root)/d(leaf) for every requested leaf; root must be scalar.
inline GradientMap backward(const Tape& tape, const Tensor& root,
                            std::span<const std::int64_t> leaves) {
  require(root.on_tape(), "backward: root is not on the tape");
  require(root.numel() == 1, "backward: root is not scalar");
  const std::pair<std::int64_t, Tensor> seed{root.node(), Tensor::scalar(1.0)};
  return backward_seeded(tape, {&seed, 1}, leaves);
}

inline GradientMap backward(const Tape& tape, const Tensor& root,
                            std::initializer_list<std::int64_t> leaves) {
  return backward(tape, root,
                  std::span<const std::int64_t>(leaves.begin(), leaves.size()));
}

// ---------------------------------------------------------------------------
// operator sugar

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }
inline Tensor operator*(const Tensor& a, double c) { return smul(a, c); }
inline Tensor operator*(double c, const Tensor& a) { return smul(a, c); }
inline Tensor operator/(const Tensor& a, double c) { return smul(a, 1.0 / c); }

}  // namespace seisgrad
