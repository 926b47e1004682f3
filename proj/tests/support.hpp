#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "ns3dvar/spectral.hpp"

namespace ns3dvar::testing {

inline bool canonical(Wavevector k) {
  return k.k2 > 0 || (k.k2 == 0 && k.k1 > 0);
}

// Gaussian coefficients on canonical retained modes with |k|^2 <= max_shell,
// mirrored to satisfy the reality constraint.
inline SpectralField random_field(const SpectralGrid& grid, std::uint64_t seed,
                                  int max_shell = 1 << 30,
                                  double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  SpectralField u(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    if (!grid.is_retained(k) || !canonical(k) || k.norm_sq() > max_shell)
      continue;
    const double re = normal(rng);
    u.set_pair(k, {re, normal(rng)});
  }
  return u;
}

// u(x) = sum_k u_k (k^perp/|k|) exp(2 pi i k.x / L) by direct summation.
inline std::pair<double, double> evaluate_direct(const SpectralField& u,
                                                 double x1, double x2) {
  const SpectralGrid& g = u.grid();
  std::complex<double> v1{}, v2{};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Wavevector k = g.wavevector(i);
    if (k.is_zero() || u[i] == std::complex<double>{}) continue;
    const double n = std::sqrt(static_cast<double>(k.norm_sq()));
    const double theta = 2 * std::numbers::pi * (k.k1 * x1 + k.k2 * x2) / g.length();
    const std::complex<double> w = u[i] * std::polar(1.0, theta);
    v1 += w * (k.k2 / n);
    v2 += w * (-k.k1 / n);
  }
  return {v1.real(), v2.real()};
}

inline Complex at(const SpectralField& u, int k1, int k2) {
  return u[Wavevector{k1, k2}];
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace ns3dvar::testing
