#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "aisarah/linear_model.hpp"

namespace aisarah {

/// alpha~ = -xi'(0) / |xi''(0)|. Empty when the probe is degenerate
/// (|xi''(0)| <= 1e-300 or a non-finite result); the caller picks a fallback.
inline std::optional<double> one_step_newton(double xi_prime0, double xi_double_prime0) noexcept {
  if (xi_prime0 == 0.0 && std::isfinite(xi_double_prime0)) return 0.0;
  const double curvature = std::abs(xi_double_prime0);
  if (!(curvature > 1e-300)) return std::nullopt;
  const double step = -xi_prime0 / curvature;
  if (!std::isfinite(step)) return std::nullopt;
  return step;
}

inline std::optional<double> one_step_newton(const CurvatureProbe& probe) noexcept {
  return one_step_newton(probe.xi_prime0, probe.xi_double_prime0);
}

/// Adaptive upper bound: delta is an exponentially smoothed mean of 1/alpha~
/// (a smoothed harmonic mean of the step estimates) and alpha_max = 1/delta.
/// delta carries over from one outer loop to the next.
class StepSizeController {
 public:
  explicit StepSizeController(double gamma = 1.0 / 32.0, double beta = 0.999) : gamma_(gamma), beta_(beta) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  }

  double gamma() const noexcept { return gamma_; }
  double beta() const noexcept { return beta_; }
  std::optional<double> delta() const noexcept { return delta_; }
  double alpha_max() const noexcept {
    return delta_ ? 1.0 / *delta_ : std::numeric_limits<double>::infinity();
  }

  /// Fold in a new estimate and return the step to take, min(alpha~, alpha_max),
  /// with alpha_max taken after the smoothing update.
  double update(double alpha_tilde) {
    if (!(alpha_tilde > 0.0) || !std::isfinite(alpha_tilde))
      throw std::invalid_argument("controller update needs a finite alpha~ > 0");
    const double inverse = 1.0 / alpha_tilde;
    if (!delta_) {
      delta_ = inverse;
    } else {
      delta_ = beta_ * *delta_ + (1.0 - beta_) * inverse;
    }
    return std::min(alpha_tilde, alpha_max());
  }

 private:
  double gamma_;
  double beta_;
  std::optional<double> delta_;
};

}  // namespace aisarah
