#pragma once

// Per-sample loss policies for linear models f_i(w) = phi(x_i^T w; y_i) + (lambda/2)|w|^2.
//
// A policy exposes, as functions of the prediction t = x^T w and label y:
//   value(t, y), d1(t, y), d2(t, y), d3(t, y)   -- phi and its t-derivatives
//   curvature_sup()                            -- sup_t d2(t, y)
//   max_curvature(t0, slope, eta_max, y)       -- max of d2 along t0 - eta*slope, eta in [0, eta_max]

#include <algorithm>
#include <cmath>
#include <limits>

namespace aisarah {

/// Numerically stable logistic helpers on the margin z = y * x^T w.
namespace logistic {

inline double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(-z))
inline double log_one_plus_exp_neg(double z) noexcept {
  if (z >= 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

/// s(z) = exp(-z) / (1 + exp(-z))^2 = sigma(z) (1 - sigma(z)), in [0, 1/4].
inline double curvature(double z) noexcept {
  const double p = sigmoid(z);
  const double q = sigmoid(-z);
  return p * q;
}

/// ds/dz = s (1 - 2 sigma(z)).
inline double curvature_slope(double z) noexcept {
  const double p = sigmoid(z);
  const double q = sigmoid(-z);
  return p * q * (q - p);
}

}  // namespace logistic

struct LogisticLoss {
  static double value(double t, double y) noexcept { return logistic::log_one_plus_exp_neg(y * t); }
  /// -y (1 - sigma(y t))
  static double d1(double t, double y) noexcept { return -y * logistic::sigmoid(-y * t); }
  static double d2(double t, double y) noexcept { return logistic::curvature(y * t); }
  static double d3(double t, double y) noexcept { return y * logistic::curvature_slope(y * t); }
  static constexpr double curvature_sup() noexcept { return 0.25; }

  /// s is unimodal in z with its peak at 0, so along an affine segment the
  /// maximum is at an endpoint or where the margin crosses zero.
  static double max_curvature(double t0, double slope, double eta_max, double y) noexcept {
    const double z0 = y * t0;
    const double dz = -y * slope;  // z(eta) = z0 + eta * dz
    if (dz == 0.0) return logistic::curvature(z0);
    if (std::isinf(eta_max)) {
      // Unbounded segment: z sweeps to +-inf, so it reaches 0 iff it moves toward it.
      if (z0 == 0.0 || (z0 > 0.0) != (dz > 0.0)) return 0.25;
      return logistic::curvature(z0);
    }
    const double z1 = z0 + eta_max * dz;
    if ((z0 <= 0.0 && z1 >= 0.0) || (z0 >= 0.0 && z1 <= 0.0)) return 0.25;
    return std::max(logistic::curvature(z0), logistic::curvature(z1));
  }
};

}  // namespace aisarah
