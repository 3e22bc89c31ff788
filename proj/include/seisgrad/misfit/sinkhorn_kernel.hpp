#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "seisgrad/common.hpp"

namespace seisgrad::sinkhorn {

// Entropic transport kernel on a shared ground cost. For trace misfits the
// cost is ((i-j)*dt)^2 on the time axis; the exp(-lambda*cost) table is cached
// here and reused across traces and iterations. When lambda*max(cost) is
// large enough that the table would underflow, iterations switch to the
// log-domain path.
struct Kernel {
  std::int64_t n = 0;
  double lambda = 0.0;
  std::vector<double> cost;  // n x n row-major
  std::vector<double> K;     // exp(-lambda*cost); empty in log-domain mode
  bool log_domain = false;
};

inline std::shared_ptr<const Kernel> make_time_kernel(std::int64_t n, double dt,
                                                      double lambda) {
  require(n > 0, "sinkhorn: empty trace");
  require(lambda > 0.0, "sinkhorn: lambda must be > 0");
  auto k = std::make_shared<Kernel>();
  k->n = n;
  k->lambda = lambda;
  k->cost.resize(static_cast<std::size_t>(n) * n);
  double cmax = 0.0;
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j) {
      const double d = (static_cast<double>(i - j)) * dt;
      k->cost[i * n + j] = d * d;
      cmax = std::max(cmax, d * d);
    }
  k->log_domain = lambda * cmax > 200.0;
  if (!k->log_domain) {
    k->K.resize(k->cost.size());
    for (std::size_t i = 0; i < k->cost.size(); ++i)
      k->K[i] = std::exp(-lambda * k->cost[i]);
  }
  return k;
}

// lambda * median(cost) ~ 1 heuristic for the auto setting.
inline double auto_lambda(std::int64_t n, double dt) {
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) {
    const double v = (static_cast<double>(k) * dt);
    d.push_back(v * v);
  }
  // median of |i-j| over the square is approximated by the median lag
  std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
  const double med = std::max(d[d.size() / 2], 1e-30);
  return 1.0 / med;
}

struct Solution {
  double value = 0.0;
  std::vector<double> f, g;  // dual potentials, dW/dmu and dW/dnu
  double marginal_err = 0.0;
  int iters = 0;
  bool converged = false;
};

namespace detail {

inline double lse(const double* a, std::int64_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < n; ++i) m = std::max(m, a[i]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (std::int64_t i = 0; i < n; ++i) s += std::exp(a[i] - m);
  return m + std::log(s);
}

}  // namespace detail

// Solves the entropic problem min <gamma,cost> + (1/lambda) <gamma, log gamma - 1>
// over couplings of (mu, nu). Returns its value and the dual potentials,
// which are the marginal derivatives used by backward rules.
inline Solution solve(std::span<const double> mu, std::span<const double> nu,
                      const Kernel& kern, int max_iters, double tol) {
  const std::int64_t n = kern.n;
  require(static_cast<std::int64_t>(mu.size()) == n &&
              static_cast<std::int64_t>(nu.size()) == n,
          "sinkhorn: marginal size mismatch");
  const double lambda = kern.lambda;
  Solution sol;
  sol.f.assign(n, 0.0);
  sol.g.assign(n, 0.0);

  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> F(n, 0.0), G(n, 0.0);  // log u, log v
  std::vector<double> lmu(n), lnu(n);
  for (std::int64_t i = 0; i < n; ++i) {
    lmu[i] = mu[i] > 0.0 ? std::log(mu[i]) : neg_inf;
    lnu[i] = nu[i] > 0.0 ? std::log(nu[i]) : neg_inf;
  }

  if (!kern.log_domain) {
    std::vector<double> u(n, 1.0), v(n, 1.0), tmp(n);
    for (int it = 1; it <= max_iters; ++it) {
      // u = mu / (K v)
      for (std::int64_t i = 0; i < n; ++i) {
        const double* Ki = kern.K.data() + i * n;
        double s = 0.0;
        for (std::int64_t j = 0; j < n; ++j) s += Ki[j] * v[j];
        u[i] = s > 0.0 ? mu[i] / s : 0.0;
      }
      // v = nu / (K^T u)
      for (std::int64_t j = 0; j < n; ++j) tmp[j] = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        const double* Ki = kern.K.data() + i * n;
        const double ui = u[i];
        for (std::int64_t j = 0; j < n; ++j) tmp[j] += Ki[j] * ui;
      }
      for (std::int64_t j = 0; j < n; ++j)
        v[j] = tmp[j] > 0.0 ? nu[j] / tmp[j] : 0.0;
      // row marginal error (column marginal is exact after the v update)
      double err = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        const double* Ki = kern.K.data() + i * n;
        double s = 0.0;
        for (std::int64_t j = 0; j < n; ++j) s += Ki[j] * v[j];
        err = std::max(err, std::abs(u[i] * s - mu[i]));
      }
      sol.iters = it;
      sol.marginal_err = err;
      if (err < tol) {
        sol.converged = true;
        break;
      }
    }
    for (std::int64_t i = 0; i < n; ++i) {
      F[i] = u[i] > 0.0 ? std::log(u[i]) : neg_inf;
      G[i] = v[i] > 0.0 ? std::log(v[i]) : neg_inf;
    }
  } else {
    std::vector<double> row(n);
    for (int it = 1; it <= max_iters; ++it) {
      for (std::int64_t i = 0; i < n; ++i) {
        const double* ci = kern.cost.data() + i * n;
        for (std::int64_t j = 0; j < n; ++j) row[j] = G[j] - lambda * ci[j];
        const double l = detail::lse(row.data(), n);
        F[i] = lmu[i] == neg_inf ? neg_inf : lmu[i] - l;
      }
      for (std::int64_t j = 0; j < n; ++j) {
        for (std::int64_t i = 0; i < n; ++i)
          row[i] = F[i] - lambda * kern.cost[i * n + j];
        const double l = detail::lse(row.data(), n);
        G[j] = lnu[j] == neg_inf ? neg_inf : lnu[j] - l;
      }
      double err = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        if (lmu[i] == neg_inf) continue;
        const double* ci = kern.cost.data() + i * n;
        double s = 0.0;
        for (std::int64_t j = 0; j < n; ++j) {
          if (G[j] == neg_inf) continue;
          s += std::exp(F[i] + G[j] - lambda * ci[j]);
        }
        err = std::max(err, std::abs(s - mu[i]));
      }
      sol.iters = it;
      sol.marginal_err = err;
      if (err < tol) {
        sol.converged = true;
        break;
      }
    }
  }

  // value = <gamma, cost> + (1/lambda) <gamma, log gamma - 1>,
  // log gamma = F + G - lambda*cost
  double value = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    if (F[i] == neg_inf) continue;
    const double* ci = kern.cost.data() + i * n;
    for (std::int64_t j = 0; j < n; ++j) {
      if (G[j] == neg_inf) continue;
      const double lg = F[i] + G[j] - lambda * ci[j];
      const double gam = std::exp(lg);
      if (gam == 0.0) continue;
      value += gam * ci[j] + gam * (lg - 1.0) / lambda;
    }
  }
  sol.value = value;
  for (std::int64_t i = 0; i < n; ++i) {
    sol.f[i] = F[i] == neg_inf ? 0.0 : F[i] / lambda;
    sol.g[i] = G[i] == neg_inf ? 0.0 : G[i] / lambda;
  }
  return sol;
}

}  // namespace seisgrad::sinkhorn
