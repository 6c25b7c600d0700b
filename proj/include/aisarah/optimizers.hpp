#pragma once

// AI-SARAH and the baselines it is compared with (SARAH, SARAH+, SVRG, ADAM,
// SGD with momentum), all producing an OptimizerRun trajectory.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aisarah/linear_model.hpp"
#include "aisarah/rng.hpp"
#include "aisarah/run_state.hpp"
#include "aisarah/step_size_controller.hpp"
#include "aisarah/vector_ops.hpp"

namespace aisarah {

enum class Algorithm { ai_sarah, sarah, sarah_plus, svrg, adam, sgd_momentum };

inline constexpr Algorithm all_algorithms[] = {Algorithm::ai_sarah, Algorithm::sarah, Algorithm::sarah_plus,
                                               Algorithm::svrg,     Algorithm::adam,  Algorithm::sgd_momentum};

inline std::string_view algorithm_name(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::ai_sarah: return "ai-sarah";
    case Algorithm::sarah: return "sarah";
    case Algorithm::sarah_plus: return "sarah+";
    case Algorithm::svrg: return "svrg";
    case Algorithm::adam: return "adam";
    case Algorithm::sgd_momentum: return "sgdm";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept {
  for (const auto a : all_algorithms)
    if (algorithm_name(a) == name) return a;
  if (name == "sarah-plus") return Algorithm::sarah_plus;
  if (name == "sgd-momentum") return Algorithm::sgd_momentum;
  return std::nullopt;
}

struct RunConfig {
  Algorithm algorithm = Algorithm::ai_sarah;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  /// Effective passes.
  double budget = 30.0;

  /// Constant (SARAH, SARAH+, SVRG) or initial (ADAM, SGD w/m) step size.
  double step_size = 0.1;
  /// SARAH/SVRG inner loop length in effective passes, iterations = ceil(passes * n / b).
  double inner_passes = 1.0;
  /// SARAH+ inner-loop exit threshold |v_t|^2 < gamma |v_0|^2.
  double early_stop_gamma = 1.0 / 8.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double momentum = 0.9;
  /// Step size shrinks by this percentage after each completed effective pass.
  double decay_percent = 0.0;

  /// AI-SARAH: replace the adaptive step with a constant (cross-validation hook).
  std::optional<double> pinned_step;
  /// AI-SARAH / SARAH+ inner-loop cap; default ceil(5 n / b).
  std::optional<std::size_t> inner_cap;
  /// AI-SARAH step when the probe is degenerate before any bound exists; default 1/L.
  std::optional<double> fallback_step;

  double metrics_interval = 0.1;
  const SparseDataset* test = nullptr;
  /// Starting point; default N(0, 1) * 0.01 drawn from the run's seed.
  std::optional<Vector> w0;
  bool record_trace = false;
  bool record_iterates = false;
};

inline Vector initial_iterate(Rng& rng, std::size_t d) { return gaussian_vector(rng, d, 0.01); }

/// ceil(passes * n / b)
inline std::size_t inner_iterations(double passes, std::size_t n, std::size_t batch_size) {
  return static_cast<std::size_t>(std::ceil(passes * static_cast<double>(n) / static_cast<double>(batch_size)));
}

/// Safety cap on guard-terminated inner loops: ceil(5 n / b).
inline std::size_t default_inner_cap(const RunConfig& config, std::size_t n) {
  return config.inner_cap.value_or(inner_iterations(5.0, n, config.batch_size));
}

namespace detail {

template <class Model>
struct RunContext {
  const Model& model;
  const RunConfig& config;
  Rng rng;
  OptimizerRun run;
  MetricsRecorder<Model> recorder;
  BatchSampler sampler;
  std::uint64_t budget_samples;

  RunContext(const Model& m, const RunConfig& c)
      : model(m), config(c), rng(c.seed), recorder(m, c.test, c.metrics_interval),
        sampler(m.n(), c.batch_size),
        budget_samples(static_cast<std::uint64_t>(std::ceil(c.budget * static_cast<double>(m.n())))) {
    if (!(c.budget > 0.0)) throw std::invalid_argument("budget must be positive");
    if (c.batch_size == 0 || c.batch_size > m.n()) throw std::invalid_argument("batch size must lie in [1, n]");
    run.w = c.w0 ? *c.w0 : initial_iterate(rng, m.d());
    if (run.w.size() != m.d()) throw std::invalid_argument("w0 has the wrong dimension");
    run.v.assign(m.d(), 0.0);
  }

  bool budget_left() const noexcept { return run.samples < budget_samples; }

  std::size_t default_cap() const { return default_inner_cap(config, model.n()); }

  /// v = grad P(w); counts n samples. Returns |v|^2.
  double full_gradient() {
    run.v = model.full_gradient(run.w);
    run.samples += model.n();
    return squared_norm(run.v);
  }

  void keep_iterate() {
    if (config.record_iterates) run.iterates.push_back(run.w);
  }

  OptimizerRun finish(std::optional<double> step, std::optional<double> alpha_max) {
    recorder.observe(run, step, alpha_max, /*force=*/true);
    run.wall_clock_s = recorder.elapsed();
    return std::move(run);
  }
};

}  // namespace detail

/// AI-SARAH: recursive gradient with an implicit step from one Newton step on
/// xi_t and an exponentially smoothed harmonic-mean upper bound.
template <class Model>
OptimizerRun run_ai_sarah(const Model& model, const RunConfig& config, StepSizeController controller) {
  detail::RunContext<Model> ctx(model, config);
  auto& run = ctx.run;
  const auto b = config.batch_size;
  const auto cap = ctx.default_cap();
  std::optional<double> fallback = config.fallback_step;
  std::optional<double> last_step;

  ctx.keep_iterate();
  ctx.recorder.observe(run, std::nullopt, controller.alpha_max());

  Vector w_prev(model.d());
  Vector diff(model.d());
  Vector anchor(model.d());
  while (ctx.budget_left()) {
    ++run.outer;
    const double v0_sq = ctx.full_gradient();
    if (v0_sq == 0.0) break;  // stationary: the guard admits no inner step
    anchor = run.w;
    double step_sum = 0.0;
    double max_v_norm = 0.0;

    std::size_t t = 0;
    while (t < cap && ctx.budget_left() && squared_norm(run.v) >= controller.gamma() * v0_sq) {
      const auto& batch = ctx.sampler.next(ctx.rng);
      ++t;
      std::optional<double> alpha_tilde;
      double alpha = 0.0;
      const double bound_before = controller.alpha_max();
      if (config.pinned_step) {
        alpha = *config.pinned_step;
      } else {
        alpha_tilde = one_step_newton(model.xi_derivatives(run.w, run.v, batch));
        if (alpha_tilde && *alpha_tilde > 0.0) {
          alpha = controller.update(*alpha_tilde);
        } else {
          alpha_tilde.reset();
          if (std::isinf(controller.alpha_max())) {
            if (!fallback) fallback = 1.0 / global_lipschitz(model);
            alpha = *fallback;
          } else {
            alpha = controller.alpha_max();
          }
        }
      }

      const double v_norm = norm(run.v);
      w_prev = run.w;
      axpy(-alpha, run.v, run.w);
      model.gradient_difference(run.w, w_prev, batch, diff);
      axpy(1.0, diff, run.v);
      run.samples += b;
      ++run.inner_total;
      last_step = alpha;

      // Iterates of one outer loop stay within (sum of steps) * max |v_j| of the anchor.
      step_sum += alpha;
      max_v_norm = std::max(max_v_norm, v_norm);
      double dist = 0.0;
      for (std::size_t j = 0; j < anchor.size(); ++j) dist += (run.w[j] - anchor[j]) * (run.w[j] - anchor[j]);
      dist = std::sqrt(dist);
      if (dist > step_sum * max_v_norm * (1.0 + 1e-10) + 1e-300)
        throw std::logic_error("AI-SARAH iterate left its working set");

      if (config.record_trace) {
        const double in_force = alpha_tilde ? controller.alpha_max() : bound_before;
        run.trace.push_back({run.outer, t, alpha_tilde, alpha, in_force, v_norm, dist});
      }
      ctx.keep_iterate();
      ctx.recorder.observe(run, alpha, controller.alpha_max());
    }
    if (t == cap && squared_norm(run.v) >= controller.gamma() * v0_sq)
      run.warnings.push_back("outer loop " + std::to_string(run.outer) + ": inner cap of " + std::to_string(cap) +
                             " iterations reached");
    ctx.recorder.observe(run, last_step, controller.alpha_max(), /*force=*/true);
  }
  return ctx.finish(last_step, controller.alpha_max());
}

template <class Model>
OptimizerRun run_ai_sarah(const Model& model, const RunConfig& config) {
  return run_ai_sarah(model, config, StepSizeController{});
}

namespace detail {

/// Shared body of the constant-step recursive/anchored estimators.
/// `anchored` selects SVRG's v_t = grad f_S(w_t) - grad f_S(w_0) + grad P(w_0).
template <class Model, class Continue>
OptimizerRun constant_step_loops(const Model& model, const RunConfig& config, std::size_t iterations,
                                 bool anchored, bool guarded, Continue&& keep_going) {
  RunContext<Model> ctx(model, config);
  auto& run = ctx.run;
  const double alpha = config.step_size;
  const auto b = config.batch_size;

  ctx.keep_iterate();
  ctx.recorder.observe(run, alpha, std::nullopt);

  Vector w_prev(model.d());
  Vector diff(model.d());
  Vector anchor(model.d());
  Vector anchor_gradient(model.d());
  while (ctx.budget_left()) {
    ++run.outer;
    const double v0_sq = ctx.full_gradient();
    if (v0_sq == 0.0) break;
    if (iterations == 0) {
      axpy(-alpha, run.v, run.w);
      ctx.keep_iterate();
      ctx.recorder.observe(run, alpha, std::nullopt, /*force=*/true);
      continue;
    }
    anchor = run.w;
    anchor_gradient = run.v;

    std::size_t t = 0;
    while (t < iterations && ctx.budget_left() && keep_going(squared_norm(run.v), v0_sq)) {
      const auto& batch = ctx.sampler.next(ctx.rng);
      ++t;
      w_prev = run.w;
      axpy(-alpha, run.v, run.w);
      if (anchored) {
        model.gradient_difference(run.w, anchor, batch, diff);
        for (std::size_t j = 0; j < diff.size(); ++j) run.v[j] = diff[j] + anchor_gradient[j];
      } else {
        model.gradient_difference(run.w, w_prev, batch, diff);
        axpy(1.0, diff, run.v);
      }
      run.samples += b;
      ++run.inner_total;
      if (config.record_trace) run.trace.push_back({run.outer, t, std::nullopt, alpha, alpha, 0.0, 0.0});
      ctx.keep_iterate();
      ctx.recorder.observe(run, alpha, std::nullopt);
    }
    if (guarded && t == iterations && keep_going(squared_norm(run.v), v0_sq))
      run.warnings.push_back("outer loop " + std::to_string(run.outer) + ": inner cap of " +
                             std::to_string(iterations) + " iterations reached");
    ctx.recorder.observe(run, alpha, std::nullopt, /*force=*/true);
  }
  return ctx.finish(alpha, std::nullopt);
}

}  // namespace detail

/// SARAH with constant step and fixed inner length; continues from the last inner iterate.
template <class Model>
OptimizerRun run_sarah(const Model& model, const RunConfig& config) {
  const auto m = inner_iterations(config.inner_passes, model.n(), config.batch_size);
  return detail::constant_step_loops(model, config, m, /*anchored=*/false, /*guarded=*/false,
                                     [](double, double) { return true; });
}

/// SARAH+: constant step, inner loop exits once |v_t|^2 < gamma |v_0|^2.
template <class Model>
OptimizerRun run_sarah_plus(const Model& model, const RunConfig& config) {
  const double gamma = config.early_stop_gamma;
  return detail::constant_step_loops(model, config, default_inner_cap(config, model.n()), /*anchored=*/false,
                                     /*guarded=*/true, [gamma](double v_sq, double v0_sq) { return v_sq >= gamma * v0_sq; });
}

template <class Model>
OptimizerRun run_svrg(const Model& model, const RunConfig& config) {
  const auto m = inner_iterations(config.inner_passes, model.n(), config.batch_size);
  return detail::constant_step_loops(model, config, m, /*anchored=*/true, /*guarded=*/false,
                                     [](double, double) { return true; });
}

namespace detail {

/// Mini-batch first-order loop with a per-pass step decay; `update(g, lr, step_index)`
/// applies one optimizer step to run.w.
template <class Model, class Update>
OptimizerRun minibatch_loop(const Model& model, const RunConfig& config, Update&& update) {
  RunContext<Model> ctx(model, config);
  auto& run = ctx.run;
  const auto b = config.batch_size;
  const double shrink = 1.0 - config.decay_percent / 100.0;
  auto step_now = [&] {
    const auto passes = run.samples / model.n();
    return config.step_size * std::pow(shrink, static_cast<double>(passes));
  };

  ctx.keep_iterate();
  ctx.recorder.observe(run, step_now(), std::nullopt);
  std::size_t step_index = 0;
  while (ctx.budget_left()) {
    const auto& batch = ctx.sampler.next(ctx.rng);
    const double lr = step_now();
    const Vector g = model.minibatch_gradient(run.w, batch);
    update(run.w, g, lr, ++step_index);
    run.samples += b;
    ++run.inner_total;
    ctx.keep_iterate();
    ctx.recorder.observe(run, step_now(), std::nullopt);
  }
  return ctx.finish(step_now(), std::nullopt);
}

}  // namespace detail

/// ADAM with bias-corrected moments.
template <class Model>
OptimizerRun run_adam(const Model& model, const RunConfig& config) {
  Vector first(model.d(), 0.0);
  Vector second(model.d(), 0.0);
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double eps = config.adam_epsilon;
  return detail::minibatch_loop(model, config, [&](Vector& w, const Vector& g, double lr, std::size_t k) {
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(k));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(k));
    for (std::size_t j = 0; j < w.size(); ++j) {
      first[j] = b1 * first[j] + (1.0 - b1) * g[j];
      second[j] = b2 * second[j] + (1.0 - b2) * g[j] * g[j];
      w[j] -= lr * (first[j] / c1) / (std::sqrt(second[j] / c2) + eps);
    }
  });
}

/// Heavy-ball SGD: buf = momentum * buf + g, w -= lr * buf.
template <class Model>
OptimizerRun run_sgd_momentum(const Model& model, const RunConfig& config) {
  Vector buffer(model.d(), 0.0);
  const double beta = config.momentum;
  return detail::minibatch_loop(model, config, [&](Vector& w, const Vector& g, double lr, std::size_t k) {
    for (std::size_t j = 0; j < w.size(); ++j) {
      buffer[j] = k == 1 ? g[j] : beta * buffer[j] + g[j];
      w[j] -= lr * buffer[j];
    }
  });
}

template <class Model>
OptimizerRun run_algorithm(const Model& model, const RunConfig& config,
                           StepSizeController controller = StepSizeController{}) {
  switch (config.algorithm) {
    case Algorithm::ai_sarah: return run_ai_sarah(model, config, controller);
    case Algorithm::sarah: return run_sarah(model, config);
    case Algorithm::sarah_plus: return run_sarah_plus(model, config);
    case Algorithm::svrg: return run_svrg(model, config);
    case Algorithm::adam: return run_adam(model, config);
    case Algorithm::sgd_momentum: return run_sgd_momentum(model, config);
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace aisarah
