#pragma once

// Smooth test fields on the Kodaira-Thurston block.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace akscal::oplab {

/// Theta-type series invariant under (x, y, z) -> (x + 1, y, z + y), unit
/// shifts of y and z, and t -> t + d.
struct Theta {
  int m = 1, k = 0, l = 1;
  double x0 = 0.3, sigma = 0.3, phase = 0.0, tPhase = 0.0, d = 1.0;

  double operator()(double x, double y, double z, double t) const {
    constexpr double twoPi = 2.0 * std::numbers::pi;
    std::complex<double> s = 0.0;
    for (int n = -6; n <= 6; ++n) {
      const double g = std::exp(-(x + n - x0) * (x + n - x0) / (2.0 * sigma * sigma));
      s += g * std::polar(1.0, twoPi * (m * (z + n * y) + k * y) + phase);
    }
    return s.real() * std::cos(twoPi * l * t / d + tPhase);
  }

  /// m = 1, k in {-1, 0, 1}, sigma in [0.35, 0.5], random phases and centre.
  static Theta random(std::mt19937_64& rng) {
    constexpr double twoPi = 2.0 * std::numbers::pi;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Theta th;
    th.k = static_cast<int>(u(rng) * 3) - 1;
    th.x0 = u(rng);
    th.sigma = 0.35 + 0.15 * u(rng);
    th.phase = twoPi * u(rng);
    th.tPhase = twoPi * u(rng);
    return th;
  }
};

}  // namespace akscal::oplab
