#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace seisgrad {

// Error taxonomy mirrored by the CLI exit codes: validation -> 1, numerical -> 2.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad shapes, bad parameters, schema violations. Raised before any heavy compute.
struct ValidationError : Error {
  using Error::Error;
};

// Non-finite values, solver blow-up, non-convergence.
struct NumericalError : Error {
  using Error::Error;
};

// File format problems: bad magic, CRC mismatch, truncation.
struct IoError : Error {
  using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

// Deterministic, platform-independent RNG (splitmix64 core). std::mt19937 with
// std:: distributions is implementation-defined, which would break the
// seed-reproducibility contracts, so all randomness in the library goes
// through this.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; one fresh pair per two draws.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * u2);
    have_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

  // Independent stream for e.g. per-sample dropout masks.
  Rng stream(std::uint64_t index) const {
    Rng r(state_ ^ (0xa0761d6478bd642fULL * (index + 1)));
    r.next_u64();
    return r;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace seisgrad
