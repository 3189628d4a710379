#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace exo {

/// Uniform doubles from the raw engine bits, so sequences match across standard libraries.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : rng_(seed) {}
  double operator()() { return double(rng_() >> 11) * 0x1.0p-53; }
  double operator()(double lo, double hi) { return lo + (hi - lo) * (*this)(); }

 private:
  std::mt19937_64 rng_;
};

/// Standard normal samples by Box-Muller on UniformSource.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : u_(seed) {}
  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = u_();
    const double u2 = u_();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  UniformSource u_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace exo
