#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>

#include "renorm/energy.hpp"
#include "renorm/grid.hpp"

namespace testing {

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::shared_ptr<const renorm::Grid> make_grid(const renorm::Domain& domain, double h) {
  return std::make_shared<const renorm::Grid>(domain, h);
}

// Independent random nodal values, zero off the interior.
inline renorm::ScalarField noise_field(std::shared_ptr<const renorm::Grid> grid, std::uint64_t seed,
                                       double amplitude = 1.0) {
  std::mt19937_64 rng(seed);
  renorm::ScalarField f(grid);
  for (std::size_t k = 0; k < grid->size(); ++k) {
    if (grid->is_interior(k)) f[k] = amplitude * uniform(rng, -1.0, 1.0);
  }
  return f;
}

// Smooth field vanishing at the boundary: d times a random trigonometric mode.
inline renorm::ScalarField smooth_field(const renorm::SingularPart& sp, std::uint64_t seed, double amplitude = 1.0) {
  std::mt19937_64 rng(seed);
  const double a = uniform(rng, 1.0, 4.0);
  const double b = uniform(rng, 1.0, 4.0);
  const double c = uniform(rng, 0.0, 6.3);
  renorm::ScalarField f(sp.grid);
  for (std::size_t k = 0; k < sp.grid->size(); ++k) {
    if (!sp.grid->is_interior(k)) continue;
    const auto p = sp.grid->node(k);
    f[k] = amplitude * sp.d[k] * std::sin(a * p[0] + c) * std::cos(b * p[1] - c);
  }
  return f;
}

inline double relative_difference(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace testing
