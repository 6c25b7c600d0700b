#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace aisarah {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
  return acc;
}

inline double squared_norm(std::span<const double> a) noexcept { return dot(a, a); }

inline double norm(std::span<const double> a) noexcept { return std::sqrt(squared_norm(a)); }

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  for (std::size_t j = 0; j < x.size(); ++j) y[j] += alpha * x[j];
}

inline void scale(double alpha, std::span<double> x) noexcept {
  for (auto& v : x) v *= alpha;
}

inline double max_abs_difference(std::span<const double> a, std::span<const double> b) noexcept {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

inline bool all_finite(std::span<const double> a) noexcept {
  for (const double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace aisarah
