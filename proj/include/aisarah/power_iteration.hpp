#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "aisarah/vector_ops.hpp"

namespace aisarah {

struct PowerIterationResult {
  double eigenvalue = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Largest eigenvalue of a symmetric PSD operator given as `apply(u, out)`
/// (`out` = A u, pre-zeroed). Starts from the normalized all-ones vector and
/// stops when the Rayleigh quotient changes by at most `rel_tol` (relative).
template <class Apply>
PowerIterationResult power_iteration(std::size_t dim, Apply&& apply, double rel_tol = 1e-12,
                                     std::size_t max_iterations = 10000) {
  PowerIterationResult result;
  if (dim == 0) {
    result.converged = true;
    return result;
  }
  Vector u(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  Vector au(dim);
  double previous = 0.0;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    std::fill(au.begin(), au.end(), 0.0);
    apply(std::span<const double>(u), std::span<double>(au));
    const double rayleigh = dot(u, au);
    const double len = norm(au);
    result.iterations = it;
    result.eigenvalue = rayleigh;
    if (len == 0.0) {
      // u is in the null space; for a PSD operator started at the ones
      // vector this only happens for the zero matrix in practice.
      result.eigenvalue = 0.0;
      result.converged = true;
      return result;
    }
    if (it > 1 && std::abs(rayleigh - previous) <= rel_tol * std::abs(rayleigh)) {
      result.converged = true;
      return result;
    }
    previous = rayleigh;
    for (std::size_t j = 0; j < dim; ++j) u[j] = au[j] / len;
  }
  return result;
}

}  // namespace aisarah
