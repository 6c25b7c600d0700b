#pragma once

// Trajectory bookkeeping shared by every optimizer: sample accounting in
// effective passes, the metrics cadence and optional per-step traces.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aisarah/linear_model.hpp"
#include "aisarah/vector_ops.hpp"

namespace aisarah {

struct MetricsRow {
  double effective_pass = 0.0;
  double wall_clock_s = 0.0;
  double loss = 0.0;
  double grad_norm_sq = 0.0;
  std::optional<double> step_size;
  std::optional<double> alpha_max;
  std::optional<double> test_accuracy;
  /// Sample evaluations so far; effective_pass = samples / n.
  std::uint64_t samples = 0;
};

/// One inner iteration of a recursive-gradient method.
struct InnerStep {
  std::size_t outer = 0;
  std::size_t inner = 0;
  std::optional<double> alpha_tilde;  // empty when the probe was degenerate or unused
  double alpha = 0.0;
  double alpha_max = 0.0;            // bound in force when alpha was chosen
  double v_norm_before = 0.0;        // |v_{t-1}|
  double distance_from_anchor = 0.0; // |w_t - w_0|
};

struct OptimizerRun {
  Vector w;
  Vector v;
  std::size_t outer = 0;
  std::size_t inner_total = 0;
  std::uint64_t samples = 0;
  double wall_clock_s = 0.0;
  std::vector<MetricsRow> rows;
  std::vector<std::string> warnings;
  /// Filled when RunConfig::record_trace is set.
  std::vector<InnerStep> trace;
  /// Every iterate after each update; filled when RunConfig::record_iterates is set.
  std::vector<Vector> iterates;

  double effective_pass(std::size_t n) const noexcept {
    return static_cast<double>(samples) / static_cast<double>(n);
  }
};

/// Appends MetricsRows every `interval` effective passes and on demand.
template <class Model>
class MetricsRecorder {
 public:
  MetricsRecorder(const Model& model, const SparseDataset* test, double interval)
      : model_(&model), test_(test), interval_samples_(interval * static_cast<double>(model.n())),
        start_(std::chrono::steady_clock::now()) {}

  /// Record if the counter crossed the next cadence mark (or `force`).
  void observe(OptimizerRun& run, std::optional<double> step, std::optional<double> alpha_max, bool force = false) {
    if (alpha_max && !std::isfinite(*alpha_max)) alpha_max.reset();  // no bound yet
    const bool due = static_cast<double>(run.samples) >= next_mark_ * interval_samples_;
    if (!due && !force) return;
    if (!run.rows.empty() && run.rows.back().samples == run.samples) {
      // Same point already on record; keep the richer step info.
      if (step) run.rows.back().step_size = step;
      if (alpha_max) run.rows.back().alpha_max = alpha_max;
      return;
    }
    if (due) next_mark_ = std::floor(static_cast<double>(run.samples) / interval_samples_) + 1.0;

    MetricsRow row;
    row.samples = run.samples;
    row.effective_pass = run.effective_pass(model_->n());
    row.wall_clock_s = elapsed();
    row.loss = model_->loss(run.w);
    row.grad_norm_sq = squared_norm(model_->full_gradient(run.w));
    row.step_size = step;
    row.alpha_max = alpha_max;
    if (test_ != nullptr) row.test_accuracy = accuracy(*test_, run.w);
    run.rows.push_back(row);
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  const Model* model_;
  const SparseDataset* test_;
  double interval_samples_;
  double next_mark_ = 0.0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace aisarah
