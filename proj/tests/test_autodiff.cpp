#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "seisgrad/checks.hpp"
#include "seisgrad/ops.hpp"

using namespace seisgrad;

TEST_CASE("tensor basics") {
  Tensor z = Tensor::zeros(Shape::mat(3, 4));
  REQUIRE(z.numel() == 12);
  REQUIRE(z.shape().rank() == 2);
  Tensor s = Tensor::scalar(2.5);
  REQUIRE(s.scalar_value() == 2.5);
  REQUIRE_THROWS_AS(Tensor::from(Shape::vec(3), {1.0, 2.0}), ValidationError);
}

TEST_CASE("product rule example: mul(3,4) grad is 4") {
  Tape tape;
  Recording rec(tape);
  Tensor x = tape.leaf(Tensor::scalar(3.0));
  Tensor y = tape.leaf(Tensor::scalar(4.0));
  Tensor p = mul(x, y);
  REQUIRE(p.scalar_value() == 12.0);
  GradientMap g = backward(tape, p, {x.node(), y.node()});
  REQUIRE(g.at(x).scalar_value() == 4.0);
  REQUIRE(g.at(y).scalar_value() == 3.0);
}

TEST_CASE("d(x^2)/dx at 3 is 6") {
  Tape tape;
  Recording rec(tape);
  Tensor x = tape.leaf(Tensor::scalar(3.0));
  Tensor y = pow(x, 2.0);
  GradientMap g = backward(tape, y, {x.node()});
  REQUIRE(g.at(x).scalar_value() == Catch::Approx(6.0).margin(1e-14));
}

TEST_CASE("grad of sum(a*b) wrt a equals b") {
  Rng rng(7);
  Tensor a = random_tensor(Shape::vec(16), rng);
  Tensor b = random_tensor(Shape::vec(16), rng);
  Tape tape;
  Recording rec(tape);
  Tensor la = tape.leaf(a);
  Tensor r = sum(mul(la, b));
  GradientMap g = backward(tape, r, {la.node()});
  for (std::int64_t i = 0; i < 16; ++i)
    REQUIRE(g.at(la)[i] == Catch::Approx(b[i]).margin(0));
}

TEST_CASE("softmin3 hard limit routes gradient to the min input") {
  Tape tape;
  Recording rec(tape);
  Tensor a = tape.leaf(Tensor::scalar(1.0));
  Tensor b = tape.leaf(Tensor::scalar(2.0));
  Tensor c = tape.leaf(Tensor::scalar(3.0));
  Tensor m = softmin3(a, b, c, 0.0);
  REQUIRE(m.scalar_value() == 1.0);
  GradientMap g = backward(tape, m, {a.node(), b.node(), c.node()});
  REQUIRE(g.at(a).scalar_value() == 1.0);
  REQUIRE(g.at(b).scalar_value() == 0.0);
  REQUIRE(g.at(c).scalar_value() == 0.0);
}

TEST_CASE("shift2d of a constant field keeps the interior, zero pads") {
  Tensor f = Tensor::full(Shape::mat(5, 5), 3.0);
  Tensor s = shift2d(f, 1, 2);
  for (std::int64_t r = 0; r < 5; ++r) {
    for (std::int64_t c = 0; c < 3; ++c) REQUIRE(s.at(r, c) == 3.0);
    REQUIRE(s.at(r, 3) == 0.0);
    REQUIRE(s.at(r, 4) == 0.0);
  }
}

TEST_CASE("hilbert of an exact grid cosine is the matching sine") {
  const std::int64_t n = 128;
  const std::int64_t k = 5;
  Tensor x = Tensor::zeros(Shape::vec(n));
  for (std::int64_t t = 0; t < n; ++t)
    x[t] = std::cos(2.0 * M_PI * k * t / static_cast<double>(n));
  Tensor h = hilbert_analytic(x);
  for (std::int64_t t = 0; t < n; ++t) {
    const double want = std::sin(2.0 * M_PI * k * t / static_cast<double>(n));
    REQUIRE(h[t] == Catch::Approx(want).margin(1e-10));
  }
}

TEST_CASE("hilbert matches a dense DFT-matrix oracle on odd lengths") {
  // oracle: build H columnwise by applying the multiplier to unit vectors
  // through an explicit O(n^2) DFT
  const std::int64_t n = 21;
  Rng rng(11);
  Tensor x = random_tensor(Shape::vec(n), rng);
  // direct DFT
  std::vector<std::complex<double>> X(n);
  for (std::int64_t k = 0; k < n; ++k) {
    std::complex<double> s = 0;
    for (std::int64_t t = 0; t < n; ++t)
      s += x[t] * std::exp(std::complex<double>(0, -2.0 * M_PI * k * t / n));
    X[k] = s;
  }
  for (std::int64_t k = 1; k <= (n - 1) / 2; ++k) X[k] *= std::complex<double>(0, -1);
  X[0] = 0;
  for (std::int64_t k = (n + 1) / 2; k < n; ++k) X[k] *= std::complex<double>(0, 1);
  std::vector<double> want(n);
  for (std::int64_t t = 0; t < n; ++t) {
    std::complex<double> s = 0;
    for (std::int64_t k = 0; k < n; ++k)
      s += X[k] * std::exp(std::complex<double>(0, 2.0 * M_PI * k * t / n));
    want[t] = s.real() / n;
  }
  Tensor h = hilbert_analytic(x);
  for (std::int64_t t = 0; t < n; ++t)
    REQUIRE(h[t] == Catch::Approx(want[t]).margin(1e-11));
}

TEST_CASE("adjoint tests for the linear primitives") {
  REQUIRE(adjoint_test(LinearOpKind::shift2d_rows) < 1e-12);
  REQUIRE(adjoint_test(LinearOpKind::shift2d_cols) < 1e-12);
  REQUIRE(adjoint_test(LinearOpKind::stencil_plus) < 1e-12);
  REQUIRE(adjoint_test(LinearOpKind::stencil_minus) < 1e-12);
  REQUIRE(adjoint_test(LinearOpKind::conv2d_fixed) < 1e-12);
  REQUIRE(adjoint_test(LinearOpKind::gather_scatter) < 1e-12);
  REQUIRE(adjoint_test(LinearOpKind::upsample2x) < 1e-12);
  REQUIRE(adjoint_test(LinearOpKind::hilbert) < 1e-10);
}

TEST_CASE("chain-rule soundness of every primitive on random composites") {
  Rng rng(123);
  const double tol = 1e-6;
  const double h = 1e-6;

  SECTION("elementwise chain") {
    Tensor x = random_tensor(Shape::vec(12), rng, 0.3, 1.7);
    auto f = [](const Tensor& t) {
      Tensor a = exp(smul(t, 0.3));
      Tensor b = log(add(a, Tensor::full(t.shape(), 1.5)));
      Tensor c = tanh(mul(b, a));
      Tensor d = sqrt(add(mul(c, c), Tensor::full(t.shape(), 0.9)));
      Tensor e = leaky_relu(sub(d, b), 0.1);
      Tensor f2 = abs(div(e, add(a, Tensor::full(t.shape(), 0.2))));
      Tensor g2 = clamp(f2, -0.8, 0.8);
      Tensor h2 = pow(add(g2, Tensor::full(t.shape(), 1.1)), 1.7);
      return mean(h2);
    };
    REQUIRE(grad_check(f, x, h) < tol);
  }

  SECTION("structural chain") {
    Tensor x = random_tensor(Shape::mat(6, 6), rng);
    IndexList idx = make_indices({1, 5, 9, 14, 22, 30});
    auto f = [idx](const Tensor& t) {
      Tensor s = shift2d(t, 0, 1);
      Tensor u = upsample2x_nearest(s);
      Tensor st = stencil2d(u, 1, 0, 4, 2.0);
      Tensor r = reshape(st, Shape::vec(144));
      Tensor base = Tensor::zeros(Shape::vec(40));
      Tensor g2 = gather(t, idx);
      Tensor sc = scatter_add(base, idx, g2);
      return add(sum(mul(r, r)), sum(mul(sc, sc)));
    };
    REQUIRE(grad_check(f, x, h) < tol);
  }

  SECTION("dense / matmul / dot / conv") {
    Rng r2(5);
    Tensor W = random_tensor(Shape::mat(5, 8), r2);
    Tensor b = random_tensor(Shape::vec(5), r2);
    Tensor M = random_tensor(Shape::mat(4, 5), r2);
    Tensor k = random_tensor(Shape::mat(4, 4), r2);
    Tensor bias = Tensor::scalar(0.2);
    Tensor x = random_tensor(Shape::vec(8), r2);
    auto f = [&](const Tensor& t) {
      Tensor d = dense(t, W, b);
      Tensor m = matmul(M, d);
      Tensor img = reshape(stack_rows(std::vector<Tensor>{m, m, m, m}),
                           Shape::mat(4, 4));
      Tensor c = conv2d(img, k, bias);
      return add(dot(m, m), sum(c));
    };
    REQUIRE(grad_check(f, x, h) < tol);
  }

  SECTION("hilbert + softmin3 + dropout") {
    Rng r3(9);
    Tensor x = random_tensor(Shape::vec(16), r3);
    Tensor mask = Tensor::zeros(Shape::vec(16));
    for (std::int64_t i = 0; i < 16; ++i)
      mask[i] = (r3.uniform() < 0.25) ? 0.0 : 1.0 / 0.75;
    auto f = [&](const Tensor& t) {
      Tensor ht = hilbert_analytic(t);
      Tensor e = sqrt(add(add(mul(t, t), mul(ht, ht)),
                          Tensor::full(t.shape(), 1e-12)));
      Tensor sm = softmin3(e, smul(e, 0.5), add(e, Tensor::full(t.shape(), 0.1)),
                           0.3);
      return sum(dropout(sm, mask));
    };
    REQUIRE(grad_check(f, x, h) < tol);
  }
}

TEST_CASE("backward determinism and linearity") {
  Rng rng(77);
  Tensor x0 = random_tensor(Shape::vec(32), rng);

  Tape tape;
  Recording rec(tape);
  Tensor x = tape.leaf(x0);
  Tensor hx = hilbert_analytic(x);
  Tensor fa = sum(mul(x, hx));
  Tensor fb = mean(mul(x, x));
  Tensor combo = add(smul(fa, 0.7), smul(fb, -1.3));

  GradientMap g1 = backward(tape, combo, {x.node()});
  GradientMap g2 = backward(tape, combo, {x.node()});
  for (std::int64_t i = 0; i < 32; ++i)
    REQUIRE(g1.at(x)[i] == g2.at(x)[i]);  // bit identical

  GradientMap ga = backward(tape, fa, {x.node()});
  GradientMap gb = backward(tape, fb, {x.node()});
  for (std::int64_t i = 0; i < 32; ++i) {
    const double want = 0.7 * ga.at(x)[i] - 1.3 * gb.at(x)[i];
    REQUIRE(g1.at(x)[i] == Catch::Approx(want).margin(1e-12));
  }
}

TEST_CASE("tape monotonicity: inputs precede outputs") {
  Tape tape;
  Recording rec(tape);
  Tensor x = tape.leaf(Tensor::vec({1, 2, 3}));
  Tensor y = mul(x, x);
  Tensor z = sum(y);
  for (std::int64_t i = 0; i < tape.size(); ++i)
    for (const auto& a : tape.node(i).in)
      if (a.id >= 0) REQUIRE(a.id < i);
  REQUIRE(z.node() == tape.size() - 1);
}

TEST_CASE("paused recording adds no nodes") {
  Tape tape;
  Recording rec(tape);
  Tensor x = tape.leaf(Tensor::vec({1, 2, 3}));
  const std::int64_t before = tape.size();
  {
    Paused off;
    Tensor y = mul(x, x);
    REQUIRE_FALSE(y.on_tape());
  }
  REQUIRE(tape.size() == before);
  Tensor y2 = mul(x, x);
  REQUIRE(y2.on_tape());
}

TEST_CASE("non-finite outputs are rejected") {
  Tensor a = Tensor::vec({1.0, 0.0});
  Tensor b = Tensor::vec({0.0, 0.0});
  REQUIRE_THROWS_AS(div(a, b), NumericalError);
  REQUIRE_THROWS_AS(log(Tensor::vec({-1.0})), NumericalError);
}

TEST_CASE("shape mismatch is rejected") {
  REQUIRE_THROWS_AS(add(Tensor::zeros(Shape::vec(3)), Tensor::zeros(Shape::vec(4))),
                    ValidationError);
  REQUIRE_THROWS_AS(softmin3(Tensor::zeros(Shape::vec(3)),
                             Tensor::zeros(Shape::vec(3)),
                             Tensor::zeros(Shape::vec(4)), 1.0),
                    ValidationError);
  REQUIRE_THROWS_AS(softmin3(Tensor::scalar(1), Tensor::scalar(1),
                             Tensor::scalar(1), -0.5),
                    ValidationError);
}

TEST_CASE("backward validates root and leaves") {
  Tape tape;
  Recording rec(tape);
  Tensor x = tape.leaf(Tensor::vec({1, 2}));
  Tensor y = mul(x, x);
  REQUIRE_THROWS_AS(backward(tape, y, {x.node()}), ValidationError);  // not scalar
  Tensor s = sum(y);
  REQUIRE_THROWS_AS(backward(tape, s, {s.node() + 5}), ValidationError);
}

TEST_CASE("grad_check on exp and on linear functions") {
  auto fexp = [](const Tensor& t) { return sum(exp(t)); };
  Tensor ones = Tensor::full(Shape::vec(4), 1.0);
  REQUIRE(grad_check(fexp, ones, 1e-6) < 1e-8);

  auto flin = [](const Tensor& t) { return sum(smul(t, 3.0)); };
  Tensor x = Tensor::vec({0.4, -1.2, 2.2, 0.7});
  REQUIRE(grad_check(flin, x, 1e-3) < 1e-12);
  REQUIRE(grad_check(flin, x, 0.25) < 1e-12);
}

TEST_CASE("grad_check rejects non-finite probes") {
  auto f = [](const Tensor& t) { return sum(log(t)); };
  Tensor x = Tensor::vec({1e-7, 2.0});
  REQUIRE_THROWS_AS(grad_check(f, x, 1e-3), NumericalError);  // probes x-h < 0
}
