#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "seisgrad/common.hpp"

namespace seisgrad::fftutil {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey. n must be a power of two.
inline void fft_pow2(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double pi = 3.14159265358979323846264338327950288;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const cplx wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        cplx u = a[i + k];
        cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

// DFT of arbitrary length via Bluestein's chirp-z reduction to a pow2 FFT.
inline std::vector<cplx> dft(std::span<const cplx> in, bool inverse) {
  const std::size_t n = in.size();
  if (n == 0) return {};
  if (is_pow2(n)) {
    std::vector<cplx> a(in.begin(), in.end());
    fft_pow2(a, inverse);
    return a;
  }
  const double pi = 3.14159265358979323846264338327950288;
  const double sgn = inverse ? 1.0 : -1.0;
  // chirp[k] = exp(sgn*i*pi*k^2/n); k^2 mod 2n keeps the argument bounded.
  std::vector<cplx> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) % (2 * n);
    const double ang = sgn * pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = cplx(std::cos(ang), std::sin(ang));
  }
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  std::vector<cplx> a(m, cplx(0, 0)), b(m, cplx(0, 0));
  for (std::size_t k = 0; k < n; ++k) a[k] = in[k] * chirp[k];
  for (std::size_t k = 0; k < n; ++k) {
    b[k] = std::conj(chirp[k]);
    if (k) b[m - k] = std::conj(chirp[k]);
  }
  fft_pow2(a, false);
  fft_pow2(b, false);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  fft_pow2(a, true);
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
  if (inverse) {
    for (auto& x : out) x /= static_cast<double>(n);
  }
  return out;
}

// Discrete Hilbert transform: imaginary part of the analytic signal built with
// the frequency-domain multiplier (2 on positive frequencies, 0 on negative,
// 1 at DC and Nyquist). Equivalently IDFT(-i*sgn(k) * X) taken real.
// The L2 adjoint of this real-linear map is its negation, so backward rules
// call with adjoint=true.
inline std::vector<double> hilbert(std::span<const double> x, bool adjoint = false) {
  const std::size_t n = x.size();
  if (n < 2) return std::vector<double>(n, 0.0);
  std::vector<cplx> buf(n);
  for (std::size_t k = 0; k < n; ++k) buf[k] = cplx(x[k], 0.0);
  std::vector<cplx> X = dft(buf, false);
  const cplx mi = adjoint ? cplx(0, 1) : cplx(0, -1);
  const std::size_t half = n / 2;
  X[0] = cplx(0, 0);
  for (std::size_t k = 1; k < half; ++k) X[k] *= mi;
  if (n % 2 == 0)
    X[half] = cplx(0, 0);
  else
    X[half] *= mi;
  for (std::size_t k = half + 1; k < n; ++k) X[k] *= -mi;
  std::vector<cplx> y = dft(X, true);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = y[k].real();
  return out;
}

}  // namespace seisgrad::fftutil
