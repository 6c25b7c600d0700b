#pragma once

// Hyper-parameter grids for the baselines, sweep execution and the
// spike-filtered selection rule.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aisarah/csv.hpp"
#include "aisarah/optimizers.hpp"
#include "aisarah/parallel.hpp"

namespace aisarah {

struct TuningPoint {
  double step_size = 0.0;
  std::optional<double> inner_passes;   // SARAH, SVRG
  std::optional<double> gamma;          // SARAH+
  std::optional<double> decay_percent;  // ADAM, SGD w/m

  RunConfig apply(RunConfig config) const {
    config.step_size = step_size;
    if (inner_passes) config.inner_passes = *inner_passes;
    if (gamma) config.early_stop_gamma = *gamma;
    if (decay_percent) config.decay_percent = *decay_percent;
    return config;
  }
};

namespace detail {

template <class T>
std::vector<T> every_nth(const std::vector<T>& values, std::size_t stride) {
  std::vector<T> out;
  for (std::size_t i = 0; i < values.size(); i += stride) out.push_back(values[i]);
  return out;
}

}  // namespace detail

/// {0.1, ..., 1.0} / L
inline std::vector<double> constant_step_axis(double L) {
  std::vector<double> out;
  for (int k = 1; k <= 10; ++k) out.push_back(0.1 * k / L);
  return out;
}

/// Inner lengths {0.5, 0.6, ..., 2.0} effective passes.
inline std::vector<double> inner_passes_axis() {
  std::vector<double> out;
  for (int k = 5; k <= 20; ++k) out.push_back(k / 10.0);
  return out;
}

inline std::vector<double> early_stop_axis() { return {1.0 / 2, 1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32}; }

/// 60 values spaced uniformly in log scale on [1e-3, 10].
inline std::vector<double> log_step_axis() {
  std::vector<double> out;
  for (int k = 0; k < 60; ++k) out.push_back(std::pow(10.0, -3.0 + 4.0 * k / 59.0));
  return out;
}

inline std::vector<double> decay_axis() { return {0.0, 1.0, 5.0, 10.0, 15.0}; }

/// Full lattice for `algorithm`; `stride` > 1 keeps every stride-th value
/// along each axis. L is the global smoothness constant of the objective.
inline std::vector<TuningPoint> tuning_grid(Algorithm algorithm, double L, std::size_t stride = 1) {
  if (stride == 0) throw std::invalid_argument("grid stride must be >= 1");
  std::vector<TuningPoint> grid;
  switch (algorithm) {
    case Algorithm::sarah:
    case Algorithm::svrg:
      for (const double s : detail::every_nth(constant_step_axis(L), stride))
        for (const double m : detail::every_nth(inner_passes_axis(), stride)) grid.push_back({s, m, {}, {}});
      break;
    case Algorithm::sarah_plus:
      for (const double s : detail::every_nth(constant_step_axis(L), stride))
        for (const double g : detail::every_nth(early_stop_axis(), stride)) grid.push_back({s, {}, g, {}});
      break;
    case Algorithm::adam:
    case Algorithm::sgd_momentum:
      for (const double s : detail::every_nth(log_step_axis(), stride))
        for (const double c : detail::every_nth(decay_axis(), stride)) grid.push_back({s, {}, {}, c});
      break;
    case Algorithm::ai_sarah:
      throw std::invalid_argument("ai-sarah has no tuning grid");
  }
  return grid;
}

/// Summary of one (config, seed) run.
struct SweepRun {
  std::size_t config = 0;
  std::uint64_t seed = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double max_loss = 0.0;
  /// Some recorded loss exceeded the initial loss (or was not finite).
  bool spiked = false;
};

struct Selection {
  std::optional<std::size_t> best;
  std::vector<double> mean_final_loss;  // NaN for configs without runs
  std::vector<bool> disqualified;
};

/// Drop every config with a spiking run, then take the one with the lowest
/// mean final loss (first index on ties). Depends only on the summaries, so
/// it can be re-derived from a sweep CSV.
inline Selection select_config(std::size_t grid_size, const std::vector<SweepRun>& runs) {
  Selection sel;
  sel.mean_final_loss.assign(grid_size, 0.0);
  sel.disqualified.assign(grid_size, false);
  std::vector<std::size_t> counts(grid_size, 0);
  for (const auto& r : runs) {
    if (r.config >= grid_size) throw std::invalid_argument("sweep run refers to a config outside the grid");
    sel.mean_final_loss[r.config] += r.final_loss;
    ++counts[r.config];
    if (r.spiked) sel.disqualified[r.config] = true;
  }
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < grid_size; ++c) {
    if (counts[c] == 0) {
      sel.mean_final_loss[c] = std::numeric_limits<double>::quiet_NaN();
      sel.disqualified[c] = true;
      continue;
    }
    sel.mean_final_loss[c] /= static_cast<double>(counts[c]);
    if (sel.disqualified[c] || !std::isfinite(sel.mean_final_loss[c])) continue;
    if (sel.mean_final_loss[c] < best_value) {
      best_value = sel.mean_final_loss[c];
      sel.best = c;
    }
  }
  return sel;
}

inline SweepRun summarize_run(std::size_t config, std::uint64_t seed, const OptimizerRun& run) {
  if (run.rows.empty()) throw std::logic_error("run recorded no metrics");
  SweepRun s{config, seed, run.rows.front().loss, run.rows.back().loss, run.rows.front().loss, false};
  for (const auto& row : run.rows) {
    if (!std::isfinite(row.loss)) {
      s.spiked = true;
      s.max_loss = std::numeric_limits<double>::infinity();
      continue;
    }
    s.max_loss = std::max(s.max_loss, row.loss);
    if (row.loss > s.initial_loss) s.spiked = true;
  }
  return s;
}

struct SweepResult {
  Algorithm algorithm = Algorithm::sarah;
  std::vector<TuningPoint> grid;
  std::vector<SweepRun> runs;  // config-major, then seed order
  Selection selection;
};

/// Runs every grid point for every seed; `base` supplies everything the grid
/// does not set (algorithm, batch size, budget, ...).
template <class Model>
SweepResult run_sweep(const Model& model, const RunConfig& base, const std::vector<TuningPoint>& grid,
                      const std::vector<std::uint64_t>& seeds, std::size_t threads = default_thread_count()) {
  if (seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");
  SweepResult result;
  result.algorithm = base.algorithm;
  result.grid = grid;
  result.runs.resize(grid.size() * seeds.size());
  parallel_for(result.runs.size(), threads, [&](std::size_t job) {
    const std::size_t c = job / seeds.size();
    RunConfig config = grid[c].apply(base);
    config.seed = seeds[job % seeds.size()];
    config.record_trace = false;
    config.record_iterates = false;
    result.runs[job] = summarize_run(c, config.seed, run_algorithm(model, config));
  });
  result.selection = select_config(grid.size(), result.runs);
  return result;
}

inline constexpr std::array<std::string_view, 11> sweep_columns = {
    "config", "algo", "step_size", "inner_passes", "gamma", "decay_percent",
    "seed",   "initial_loss", "final_loss", "max_loss", "spiked"};

inline void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << csv_header(sweep_columns) << '\n';
  for (const auto& r : sweep.runs) {
    const auto& p = sweep.grid[r.config];
    out << r.config << ',' << algorithm_name(sweep.algorithm) << ',' << format_double(p.step_size) << ','
        << format_optional(p.inner_passes) << ',' << format_optional(p.gamma) << ','
        << format_optional(p.decay_percent) << ',' << r.seed << ',' << format_double(r.initial_loss) << ','
        << format_double(r.final_loss) << ',' << format_double(r.max_loss) << ',' << (r.spiked ? 1 : 0) << '\n';
  }
}

/// Parses a sweep CSV back into run summaries (grid points are not needed for selection).
inline std::vector<SweepRun> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header(sweep_columns)) throw std::runtime_error("unexpected sweep CSV header");
  std::vector<SweepRun> runs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != sweep_columns.size()) throw std::runtime_error("line " + std::to_string(lineno) + ": bad field count");
    SweepRun r;
    r.config = std::stoull(f[0]);
    r.seed = std::stoull(f[6]);
    r.initial_loss = detail::parse_csv_double(f[7], lineno);
    r.final_loss = detail::parse_csv_double(f[8], lineno);
    r.max_loss = detail::parse_csv_double(f[9], lineno);
    r.spiked = f[10] == "1";
    runs.push_back(r);
  }
  return runs;
}

}  // namespace aisarah
