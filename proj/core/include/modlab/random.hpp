#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace modlab {

// Seeded generator with a portable mapping to doubles. The standard
// distributions are implementation-defined, so uniform and normal variates
// are derived from the raw 64-bit stream directly.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int integer(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine_() % span);
  }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  std::complex<double> complex_normal() { return {normal(), normal()}; }
  std::complex<double> unit_phase() {
    const double a = uniform(0.0, 2.0 * std::numbers::pi);
    return {std::cos(a), std::sin(a)};
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace modlab
