#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "seisgrad/common.hpp"

namespace seisgrad::softdtw {

// Ground distance between two samples. The 0.5 factor is part of the frozen
// oracle values for this objective.
inline double ground(double a, double b) {
  const double d = a - b;
  return 0.5 * d * d;
}

inline double ground_dx(double a, double b) { return a - b; }

// Soft minimum of three values; gamma = 0 degenerates to a hard min with
// first-argument tie-breaking.
inline double soft_min3(double a, double b, double c, double gamma) {
  double m = a;
  if (b < m) m = b;
  if (c < m) m = c;
  if (gamma == 0.0 || m == std::numeric_limits<double>::infinity()) return m;
  const double s = std::exp((m - a) / gamma) + std::exp((m - b) / gamma) +
                   std::exp((m - c) / gamma);
  return m - gamma * std::log(s);
}

struct Result {
  std::int64_t n = 0, m = 0;
  // cumulative matrix, (n+1) x (m+1), row-major; R[0][0] = 0, borders +inf
  std::vector<double> R;
  // hard-min predecessor per cell when gamma == 0: 0 = up, 1 = left, 2 = diag
  // (stored as doubles so it can ride in a tape node's saved values)
  std::vector<double> choice;
  double value = 0.0;
};

inline Result forward(std::span<const double> x, std::span<const double> y,
                      double gamma) {
  require(gamma >= 0.0, "softdtw: gamma must be >= 0");
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  const std::int64_t m = static_cast<std::int64_t>(y.size());
  require(n > 0 && m > 0, "softdtw: empty sequence");
  const double inf = std::numeric_limits<double>::infinity();
  Result res;
  res.n = n;
  res.m = m;
  res.R.assign(static_cast<std::size_t>((n + 1) * (m + 1)), inf);
  auto R = [&](std::int64_t i, std::int64_t j) -> double& {
    return res.R[i * (m + 1) + j];
  };
  R(0, 0) = 0.0;
  const bool hard = (gamma == 0.0);
  if (hard) res.choice.assign(static_cast<std::size_t>((n + 1) * (m + 1)), 2);
  for (std::int64_t i = 1; i <= n; ++i) {
    for (std::int64_t j = 1; j <= m; ++j) {
      const double up = R(i - 1, j);
      const double left = R(i, j - 1);
      const double diag = R(i - 1, j - 1);
      const double d = ground(x[i - 1], y[j - 1]);
      if (hard) {
        double c = 0;
        double mn = up;
        if (left < mn) {
          mn = left;
          c = 1;
        }
        if (diag < mn) {
          mn = diag;
          c = 2;
        }
        R(i, j) = d + mn;
        res.choice[i * (m + 1) + j] = c;
      } else {
        R(i, j) = d + soft_min3(up, left, diag, gamma);
      }
    }
  }
  res.value = R(n, m);
  return res;
}

// Gradient of `gbar * value` w.r.t. x and y, accumulated into gx / gy
// (callers pass zero-initialized buffers). For gamma > 0 this is the
// E-matrix recursion over the saved R; for gamma == 0 a backtrack along the
// stored choices.
inline void backward(std::span<const double> x, std::span<const double> y,
                     double gamma, const double* Rdata, const double* choice,
                     double gbar, double* gx, double* gy) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  const std::int64_t m = static_cast<std::int64_t>(y.size());
  auto R = [&](std::int64_t i, std::int64_t j) { return Rdata[i * (m + 1) + j]; };
  if (gamma == 0.0) {
    std::int64_t i = n, j = m;
    while (i >= 1 && j >= 1) {
      const double gd = gbar * ground_dx(x[i - 1], y[j - 1]);
      gx[i - 1] += gd;
      gy[j - 1] -= gd;
      const int c = static_cast<int>(choice[i * (m + 1) + j]);
      if (c == 0)
        --i;
      else if (c == 1)
        --j;
      else {
        --i;
        --j;
      }
    }
    return;
  }
  std::vector<double> E(static_cast<std::size_t>((n + 2) * (m + 2)), 0.0);
  auto Em = [&](std::int64_t i, std::int64_t j) -> double& {
    return E[i * (m + 2) + j];
  };
  Em(n, m) = 1.0;
  auto weight = [&](std::int64_t pi, std::int64_t pj, std::int64_t ci,
                    std::int64_t cj) -> double {
    if (ci > n || cj > m) return 0.0;
    const double rc = R(ci, cj);
    const double rp = R(pi, pj);
    if (!std::isfinite(rc) || !std::isfinite(rp)) return 0.0;
    const double d = ground(x[ci - 1], y[cj - 1]);
    return std::exp((rc - rp - d) / gamma);
  };
  for (std::int64_t i = n; i >= 1; --i) {
    for (std::int64_t j = m; j >= 1; --j) {
      if (i == n && j == m) continue;
      const double a = weight(i, j, i + 1, j) * Em(i + 1, j);
      const double b = weight(i, j, i, j + 1) * Em(i, j + 1);
      const double c = weight(i, j, i + 1, j + 1) * Em(i + 1, j + 1);
      Em(i, j) = a + b + c;
    }
  }
  for (std::int64_t i = 1; i <= n; ++i) {
    for (std::int64_t j = 1; j <= m; ++j) {
      const double e = Em(i, j);
      if (e == 0.0) continue;
      const double gd = gbar * e * ground_dx(x[i - 1], y[j - 1]);
      gx[i - 1] += gd;
      gy[j - 1] -= gd;
    }
  }
}

}  // namespace seisgrad::softdtw
