#pragma once

// Theoretical variants: exact line-segment smoothness per sample, the
// uniform/importance-sampling runs with random-iterate return, the
// bounded-step alternative, and the sigma convergence factors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aisarah/linear_model.hpp"
#include "aisarah/rng.hpp"
#include "aisarah/step_size_controller.hpp"
#include "aisarah/vector_ops.hpp"

namespace aisarah {

struct LineSegmentSmoothness {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
};

/// Smallest L with L = max_{eta in [0, 1/L]} |Hessian f_i(w - eta v)|.
///
/// The right-hand side F(L) is non-increasing in L (a larger L shrinks the
/// segment), so L - F(L) is increasing and the fixed point is bracketed by
/// [F(inf), sup-bound]. The upper end of the final bracket is returned, which
/// keeps F(L) <= L.
template <class Loss>
LineSegmentSmoothness line_segment_smoothness(const LinearModel<Loss>& model, std::span<const double> w,
                                              std::span<const double> v, std::size_t i, double rel_tol = 1e-10,
                                              std::size_t max_iterations = 100) {
  const auto r = model.data().row(i);
  const double y = model.data().labels[i];
  const double t0 = r.dot(w);
  const double slope = r.dot(v);
  const double xsq = r.squared_norm();
  const double lambda = model.lambda();

  auto rhs = [&](double L) {
    const double reach = L > 0.0 ? 1.0 / L : std::numeric_limits<double>::infinity();
    return lambda + xsq * Loss::max_curvature(t0, slope, reach, y);
  };

  LineSegmentSmoothness out;
  const double lo_value = lambda + xsq * Loss::d2(t0, y);  // F(inf): the segment collapses to w
  if (xsq == 0.0 || slope == 0.0) {
    out.value = lo_value;
    out.iterations = 1;
    return out;
  }

  double hi = lambda + xsq * Loss::curvature_sup();
  double lo = lo_value;
  const double f_hi = rhs(hi);
  out.iterations = 1;
  if (f_hi == rhs(lo)) {
    // Curvature is flat over every candidate segment.
    out.value = f_hi;
    return out;
  }
  while (hi - lo > rel_tol * hi) {
    if (out.iterations >= max_iterations) {
      out.converged = false;
      break;
    }
    const double mid = 0.5 * (lo + hi);
    if (rhs(mid) <= mid) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++out.iterations;
  }
  out.value = hi;
  return out;
}

struct SigmaBound {
  double mu = 0.0;
  double H = 0.0;
  double eta0 = 0.0;
  double L0 = 0.0;
  double sigma = std::numeric_limits<double>::infinity();
  /// False when eta0 L0 >= 2 or mu H <= 0: the bound is undefined.
  bool valid = false;

  /// sigma < 1, i.e. the bound actually certifies contraction.
  bool contracts() const noexcept { return valid && sigma < 1.0; }
};

/// sigma = 1/(mu H) + eta0 L0 / (2 - eta0 L0).
inline SigmaBound sigma_bound(double mu, double H, double eta0, double L0) noexcept {
  SigmaBound s{mu, H, eta0, L0};
  const double product = eta0 * L0;
  if (!(product < 2.0) || !(mu * H > 0.0)) return s;
  s.sigma = 1.0 / (mu * H) + product / (2.0 - product);
  s.valid = std::isfinite(s.sigma);
  return s;
}

/// Bounded-step factor: 1/(mu a_min (m+1)) + (a_max/a_min) * a_max L / (2 - a_max L).
inline SigmaBound bounded_sigma(double mu, double alpha_min, double alpha_max, std::size_t m, double L_max) noexcept {
  SigmaBound s{mu, alpha_min * static_cast<double>(m + 1), alpha_max, L_max};
  const double product = alpha_max * L_max;
  if (!(product < 2.0) || !(mu * alpha_min > 0.0)) return s;
  s.sigma = 1.0 / (mu * alpha_min * static_cast<double>(m + 1)) + (alpha_max / alpha_min) * product / (2.0 - product);
  s.valid = std::isfinite(s.sigma);
  return s;
}

enum class SamplingMode { uniform, importance };

inline std::string_view sampling_mode_name(SamplingMode m) noexcept {
  return m == SamplingMode::uniform ? "uniform" : "importance";
}

struct TheoryConfig {
  std::size_t inner_size = 10;  // m
  std::size_t outer_loops = 5;
  SamplingMode mode = SamplingMode::uniform;
  std::uint64_t seed = 0;
  std::optional<Vector> w0;
};

struct TheoryStep {
  std::size_t outer = 0;
  std::size_t inner = 0;  // t, 0 for the anchor
  double eta = 0.0;
  double L_aggregate = 0.0;  // max (uniform) or mean (importance) of L_i^t
  double H = 0.0;            // sum of eta_0..eta_t
  double p_sum = 0.0;        // total mass of p^t
  std::optional<std::size_t> sampled;  // i_t, empty for t = 0
};

struct TheoryLoop {
  std::size_t outer = 0;
  std::vector<double> etas;
  std::vector<double> L_aggregates;
  double H = 0.0;
  SigmaBound sigma;
  std::size_t chosen = 0;
  double grad_norm_sq_start = 0.0;
  double grad_norm_sq_end = 0.0;
  /// min_t eta_t and max over (i, t) of L_i^t / (sup-bound of f_i).
  double min_eta = 0.0;
  double max_bound_ratio = 0.0;
};

struct TheoryRun {
  Vector w;
  std::vector<TheoryStep> steps;
  std::vector<TheoryLoop> loops;
  std::vector<std::string> warnings;
  /// max_i sup_w |Hessian f_i|.
  double sample_lipschitz = 0.0;
};

/// v_t - v_{t-1} for one sampled component: weight * (grad f_i(w_new) - grad f_i(w_old)),
/// weight = 1/(n p_i) under importance sampling and 1 under uniform sampling.
template <class Loss>
void recursive_increment(const LinearModel<Loss>& model, std::span<const double> w_new, std::span<const double> w_old,
                         std::size_t i, double weight, std::span<double> out) {
  const std::size_t batch[1] = {i};
  model.gradient_difference(w_new, w_old, batch, out);
  scale(weight, out);
}

/// Sampling distribution p_i = L_i / sum L.
inline std::vector<double> importance_probabilities(std::span<const double> L) {
  double total = 0.0;
  for (const double l : L) total += l;
  std::vector<double> p(L.size());
  for (std::size_t i = 0; i < L.size(); ++i) p[i] = L[i] / total;
  return p;
}

/// Runs the full-information method: all L_i^t recomputed after every step,
/// eta_t = min{1/L^t, (L^{t-1}/L^t) eta_{t-1}}, and the outer-loop output drawn
/// with probabilities q_t = eta_t / H.
template <class Loss>
TheoryRun theoretical_run(const LinearModel<Loss>& model, const TheoryConfig& config) {
  const auto n = model.n();
  const auto d = model.d();
  const auto m = config.inner_size;
  Rng rng(config.seed);

  TheoryRun out;
  out.w = config.w0 ? *config.w0 : gaussian_vector(rng, d, 0.01);
  out.sample_lipschitz = model.max_sample_smoothness();
  if (out.w.size() != d) throw std::invalid_argument("w0 has the wrong dimension");

  std::vector<double> L(n);
  std::vector<double> bounds(n);
  for (std::size_t i = 0; i < n; ++i) bounds[i] = model.sample_smoothness_bound(i);

  double max_ratio = 0.0;
  auto refresh = [&](std::span<const double> w, std::span<const double> v) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto ls = line_segment_smoothness(model, w, v, i);
      if (!ls.converged) out.warnings.push_back("line-segment fixed point hit its iteration cap");
      L[i] = ls.value;
      const double ratio = L[i] / bounds[i];
      if (!(L[i] > 0.0) || ratio > 1.0 + 1e-12)
        throw std::logic_error("local smoothness outside (0, sup-bound] for sample " + std::to_string(i));
      max_ratio = std::max(max_ratio, ratio);
    }
    if (config.mode == SamplingMode::uniform) return *std::max_element(L.begin(), L.end());
    double total = 0.0;
    for (const double l : L) total += l;
    return total / static_cast<double>(n);
  };

  std::vector<Vector> iterates(m + 1, Vector(d));
  Vector v(d);
  Vector diff(d);
  for (std::size_t k = 1; k <= config.outer_loops; ++k) {
    max_ratio = 0.0;
    TheoryLoop loop;
    loop.outer = k;
    iterates[0] = out.w;
    v = model.full_gradient(out.w);
    loop.grad_norm_sq_start = squared_norm(v);

    double L_agg = refresh(iterates[0], v);
    double eta = 1.0 / L_agg;
    std::vector<double> p = config.mode == SamplingMode::importance ? importance_probabilities(L)
                                                                    : std::vector<double>(n, 1.0 / static_cast<double>(n));
    double H = eta;
    loop.etas.push_back(eta);
    loop.L_aggregates.push_back(L_agg);
    out.steps.push_back({k, 0, eta, L_agg, H, std::accumulate(p.begin(), p.end(), 0.0), std::nullopt});

    for (std::size_t t = 1; t <= m; ++t) {
      iterates[t] = iterates[t - 1];
      axpy(-eta, v, iterates[t]);

      std::size_t i = 0;
      double weight = 1.0;
      if (config.mode == SamplingMode::importance) {
        std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
        i = pick(rng);
        weight = 1.0 / (static_cast<double>(n) * p[i]);
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        i = pick(rng);
      }
      recursive_increment(model, iterates[t], iterates[t - 1], i, weight, diff);
      axpy(1.0, diff, v);

      const double L_prev = L_agg;
      L_agg = refresh(iterates[t], v);
      eta = std::min(1.0 / L_agg, (L_prev / L_agg) * eta);
      if (config.mode == SamplingMode::importance) p = importance_probabilities(L);
      H += eta;
      loop.etas.push_back(eta);
      loop.L_aggregates.push_back(L_agg);
      out.steps.push_back({k, t, eta, L_agg, H, std::accumulate(p.begin(), p.end(), 0.0), i});
    }

    loop.H = H;
    loop.sigma = sigma_bound(model.mu(), H, loop.etas.front(), loop.L_aggregates.front());
    loop.min_eta = *std::min_element(loop.etas.begin(), loop.etas.end());
    loop.max_bound_ratio = max_ratio;

    std::discrete_distribution<std::size_t> choose(loop.etas.begin(), loop.etas.end());
    loop.chosen = choose(rng);
    out.w = iterates[loop.chosen];
    loop.grad_norm_sq_end = squared_norm(model.full_gradient(out.w));
    out.loops.push_back(std::move(loop));
  }
  return out;
}

struct BoundedAltConfig {
  std::size_t inner_size = 10;  // m
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  std::size_t outer_loops = 5;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
  std::optional<Vector> w0;
};

struct BoundedAltLoop {
  std::size_t outer = 0;
  std::size_t chosen = 0;
  double grad_norm_sq = 0.0;  // at the returned iterate
  SigmaBound sigma;
};

struct BoundedAltRun {
  Vector w;
  double initial_grad_norm_sq = 0.0;
  double L_max = 0.0;
  std::vector<BoundedAltLoop> loops;
  /// Every alpha taken, in order.
  std::vector<double> steps;
};

/// Inner steps clamp the one-step-Newton estimate into [alpha_min, alpha_max];
/// each outer loop returns an inner iterate chosen uniformly from {0, ..., m}.
template <class Loss>
BoundedAltRun bounded_alt_run(const LinearModel<Loss>& model, const BoundedAltConfig& config) {
  const double L_max = model.max_sample_smoothness();
  if (!(config.alpha_min > 0.0 && config.alpha_min <= config.alpha_max && config.alpha_max * L_max < 2.0))
    throw std::invalid_argument("bounded run needs 0 < alpha_min <= alpha_max < 2 / L_max");
  if (config.batch_size == 0 || config.batch_size > model.n()) throw std::invalid_argument("batch size must lie in [1, n]");

  const auto d = model.d();
  const auto m = config.inner_size;
  Rng rng(config.seed);
  BoundedAltRun out;
  out.L_max = L_max;
  out.w = config.w0 ? *config.w0 : gaussian_vector(rng, d, 0.01);
  if (out.w.size() != d) throw std::invalid_argument("w0 has the wrong dimension");
  out.initial_grad_norm_sq = squared_norm(model.full_gradient(out.w));

  BatchSampler sampler(model.n(), config.batch_size);
  std::vector<Vector> iterates(m + 1, Vector(d));
  Vector diff(d);
  for (std::size_t k = 1; k <= config.outer_loops; ++k) {
    iterates[0] = out.w;
    Vector v = model.full_gradient(out.w);
    for (std::size_t t = 1; t <= m; ++t) {
      const auto& batch = sampler.next(rng);
      double alpha = config.alpha_min;
      if (config.alpha_min < config.alpha_max) {
        if (const auto estimate = one_step_newton(model.xi_derivatives(iterates[t - 1], v, batch)))
          alpha = std::clamp(*estimate, config.alpha_min, config.alpha_max);
      }
      out.steps.push_back(alpha);
      iterates[t] = iterates[t - 1];
      axpy(-alpha, v, iterates[t]);
      model.gradient_difference(iterates[t], iterates[t - 1], batch, diff);
      axpy(1.0, diff, v);
    }
    std::uniform_int_distribution<std::size_t> choose(0, m);
    BoundedAltLoop loop;
    loop.outer = k;
    loop.chosen = choose(rng);
    out.w = iterates[loop.chosen];
    loop.grad_norm_sq = squared_norm(model.full_gradient(out.w));
    loop.sigma = bounded_sigma(model.mu(), config.alpha_min, config.alpha_max, m, L_max);
    out.loops.push_back(loop);
  }
  return out;
}

}  // namespace aisarah
