#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "pcvx/types.hpp"

namespace pcvx {

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(mix_seed(seed, stream)); }

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double log_uniform(Rng& rng, double lo, double hi) {
  return lo * std::pow(hi / lo, uniform(rng));
}

/// Standard complex Gaussian vector (unitarily invariant distribution).
inline Point gaussian_point(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  Point z(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double re = normal(rng);
    const double im = normal(rng);
    z(j) = Complex(re, im);
  }
  return z;
}

inline Point random_unit(Rng& rng, Eigen::Index n) {
  Point z = gaussian_point(rng, n);
  return z / z.norm();
}

inline Complex unit_phase(double angle) { return std::polar(1.0, angle); }

}  // namespace pcvx
