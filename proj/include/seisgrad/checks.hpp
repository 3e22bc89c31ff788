#pragma once

// AD verification utilities: central-difference gradient checks and
// dot-product (adjointness) tests for the linear primitives.

#include <functional>
#include <span>
#include <vector>

#include "seisgrad/ops.hpp"

namespace seisgrad {

inline Tensor random_tensor(const Shape& s, Rng& rng, double lo = -1.0,
                            double hi = 1.0) {
  Tensor t = Tensor::zeros(s);
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

inline Tensor random_normal_tensor(const Shape& s, Rng& rng) {
  Tensor t = Tensor::zeros(s);
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.normal();
  return t;
}

// max_i |g_AD,i - g_FD,i| / (|g_FD,i| + 1e-12) over the probed components
// (all components when `probe` is empty), with central differences at step h.
// `f` must map a tensor to a scalar tensor and be evaluable at x +- h e_i.
inline double grad_check(const std::function<Tensor(const Tensor&)>& f,
                         const Tensor& x, double h,
                         std::span<const std::int64_t> probe = {}) {
  require(h > 0, "grad_check: h must be > 0");
  Tape tape;
  Tensor gad;
  {
    Recording rec(tape);
    Tensor lx = tape.leaf(x);
    Tensor y = f(lx);
    require(y.numel() == 1, "grad_check: f must return a scalar");
    require(y.on_tape(), "grad_check: f does not depend on x");
    GradientMap gm = backward(tape, y, {lx.node()});
    gad = gm.at(lx);
  }
  std::vector<std::int64_t> all;
  if (probe.empty()) {
    all.resize(static_cast<std::size_t>(x.numel()));
    for (std::int64_t i = 0; i < x.numel(); ++i) all[i] = i;
    probe = all;
  }
  double worst = 0.0;
  for (const std::int64_t i : probe) {
    Tensor xp = x.clone();
    Tensor xm = x.clone();
    xp[i] += h;
    xm[i] -= h;
    const double fp = f(xp).scalar_value();
    const double fm = f(xm).scalar_value();
    const double gfd = (fp - fm) / (2.0 * h);
    const double rel = std::abs(gad[i] - gfd) / (std::abs(gfd) + 1e-12);
    worst = std::max(worst, rel);
  }
  return worst;
}

// |<Lx, y> - <x, L^T y>| / (|<Lx, y>| + 1e-12) where L^T is the op's backward
// rule applied to y. `apply` must be built from tape primitives and linear.
inline double adjoint_discrepancy(
    const std::function<Tensor(const Tensor&)>& apply, const Shape& in_shape,
    std::uint64_t seed = 42) {
  Rng rng(seed);
  Tensor x = random_tensor(in_shape, rng);
  Tape tape;
  Recording rec(tape);
  Tensor lx = tape.leaf(x);
  Tensor out = apply(lx);
  Tensor y = random_tensor(out.shape(), rng);
  const double lhs = detail::dot_raw(out, y);
  const std::pair<std::int64_t, Tensor> seed_pair{out.node(), y};
  GradientMap gm = backward_seeded(tape, {&seed_pair, 1}, {{lx.node()}});
  const double rhs = detail::dot_raw(x, gm.at(lx));
  return std::abs(lhs - rhs) / (std::abs(lhs) + 1e-12);
}

enum class LinearOpKind {
  shift2d_rows,
  shift2d_cols,
  stencil_plus,
  stencil_minus,
  conv2d_fixed,
  hilbert,
  gather_scatter,
  upsample2x,
};

// Dot-product test for one of the linear primitives on representative shapes
// with a fixed seed.
inline double adjoint_test(LinearOpKind kind, std::uint64_t seed = 42) {
  switch (kind) {
    case LinearOpKind::shift2d_rows:
      return adjoint_discrepancy(
          [](const Tensor& t) { return shift2d(t, 0, 3); }, Shape::mat(8, 8),
          seed);
    case LinearOpKind::shift2d_cols:
      return adjoint_discrepancy(
          [](const Tensor& t) { return shift2d(t, 1, -2); }, Shape::mat(8, 8),
          seed);
    case LinearOpKind::stencil_plus:
      return adjoint_discrepancy(
          [](const Tensor& t) { return stencil2d(t, 0, 0, 4, 1.25); },
          Shape::mat(9, 7), seed);
    case LinearOpKind::stencil_minus:
      return adjoint_discrepancy(
          [](const Tensor& t) { return stencil2d(t, 1, 1, 8, 0.5); },
          Shape::mat(7, 11), seed);
    case LinearOpKind::conv2d_fixed: {
      Rng krng(seed + 1);
      Tensor k = random_tensor(Shape::mat(4, 4), krng);
      return adjoint_discrepancy(
          [k](const Tensor& t) { return conv2d(t, k); }, Shape::mat(8, 8),
          seed);
    }
    case LinearOpKind::hilbert:
      return adjoint_discrepancy(
          [](const Tensor& t) { return hilbert_analytic(t); }, Shape::vec(64),
          seed);
    case LinearOpKind::gather_scatter: {
      Rng irng(seed + 2);
      std::vector<std::int64_t> ix(10);
      for (std::size_t i = 0; i < ix.size(); ++i)
        ix[i] = static_cast<std::int64_t>(irng.next_u64() % 36);
      IndexList idx = make_indices(std::move(ix));
      return adjoint_discrepancy(
          [idx](const Tensor& t) { return gather(t, idx); }, Shape::mat(6, 6),
          seed);
    }
    case LinearOpKind::upsample2x:
      return adjoint_discrepancy(
          [](const Tensor& t) { return upsample2x_nearest(t); },
          Shape::mat(4, 4), seed);
  }
  return 0.0;
}

}  // namespace seisgrad
