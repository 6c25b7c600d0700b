// aisarah: dataset management, optimizer runs, tuning sweeps, smoothness
// constants and theory runs from the command line.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aisarah/csv.hpp"
#include "aisarah/datasets.hpp"
#include "aisarah/experiment.hpp"
#include "aisarah/fetch.hpp"
#include "aisarah/theory.hpp"
#include "aisarah/tuning.hpp"

namespace fs = std::filesystem;
using namespace aisarah;

namespace {

constexpr int exit_usage = 2;
constexpr int exit_failure = 1;
constexpr std::size_t theory_max_rows = 500;

struct Common {
  std::string dataset = "a1a";
  std::string data_dir;
  bool reg = true;
  std::uint64_t split_seed = default_split_seed;
  std::string out;
  std::size_t threads = default_thread_count();

  fs::path dir() const { return data_dir.empty() ? default_data_dir() : fs::path(data_dir); }
};

void add_dataset_options(CLI::App* cmd, Common& c) {
  cmd->add_option("--dataset", c.dataset, "registry name, synthetic:N:F:SEED, sparse:N:F:SEED or file:TRAIN[,TEST]")
      ->capture_default_str();
  cmd->add_option("--data-dir", c.data_dir, "dataset cache (default: $DATA_DIR, else ./data)");
  cmd->add_flag("--reg,!--no-reg", c.reg, "lambda = 1/n (default) or 0");
  cmd->add_option("--split-seed", c.split_seed, "seed of the 75/25 split for datasets without a test file")
      ->capture_default_str();
}

LoadedData resolve(const Common& c) {
  const auto spec = parse_dataset_spec(c.dataset);
  if (spec.kind == DatasetSpec::Kind::registry) {
    const auto got = fetch(spec.info->name, c.dir());
    if (got.downloads) std::cerr << "fetched " << spec.info->name << " into " << c.dir().string() << '\n';
  }
  return load_dataset(spec, c.dir(), c.split_seed);
}

/// Writes to --out, or stdout when empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<Algorithm> parse_algorithms(const std::vector<std::string>& names) {
  std::vector<Algorithm> out;
  for (const auto& n : names) {
    if (n == "all") {
      out.assign(std::begin(all_algorithms), std::end(all_algorithms));
      continue;
    }
    const auto a = parse_algorithm(n);
    if (!a) throw UsageError("unknown algorithm '" + n + "' (ai-sarah, sarah, sarah+, svrg, adam, sgdm)");
    out.push_back(*a);
  }
  return out;
}

char format_buf[64];

const char* six(double x) {
  std::snprintf(format_buf, sizeof format_buf, "%.6f", x);
  return format_buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AI-SARAH and variance-reduced baselines for regularized logistic regression"};
  app.require_subcommand(1);

  // fetch
  Common fetch_opts;
  std::vector<std::string> fetch_names;
  auto* fetch_cmd = app.add_subcommand("fetch", "download datasets into the cache directory");
  fetch_cmd->add_option("--dataset,datasets", fetch_names, "registry names, or 'all'")->required()->delimiter(',');
  fetch_cmd->add_option("--data-dir", fetch_opts.data_dir, "dataset cache (default: $DATA_DIR, else ./data)");

  // run
  Common run_opts;
  std::vector<std::string> run_algos{"ai-sarah"};
  std::vector<std::uint64_t> run_seeds{0};
  std::optional<double> run_passes;
  std::optional<double> run_step;
  std::optional<double> run_gamma;
  double run_beta = 0.999;
  std::size_t run_batch = 64;
  double run_interval = 0.1;
  double run_inner = 1.0;
  auto* run_cmd = app.add_subcommand("run", "run optimizers and write the metrics CSV");
  add_dataset_options(run_cmd, run_opts);
  run_cmd->add_option("--algo", run_algos, "algorithms (comma separated) or 'all'")->delimiter(',');
  run_cmd->add_option("--seeds,--seed", run_seeds, "seeds (comma separated)")->delimiter(',');
  run_cmd->add_option("--passes", run_passes, "budget in effective passes (default per dataset)");
  run_cmd->add_option("--batch", run_batch, "mini-batch size")->capture_default_str();
  run_cmd->add_option("--gamma", run_gamma, "inner-loop exit threshold (AI-SARAH default 1/32, SARAH+ default 1/8)");
  run_cmd->add_option("--beta", run_beta, "AI-SARAH smoothing factor")->capture_default_str();
  run_cmd->add_option("--step", run_step, "baseline step size (default 1/(2L), ADAM 0.01, SGD w/m 0.1)");
  run_cmd->add_option("--inner-passes", run_inner, "SARAH/SVRG inner length in effective passes")->capture_default_str();
  run_cmd->add_option("--interval", run_interval, "metrics cadence in effective passes")->capture_default_str();
  run_cmd->add_option("--threads", run_opts.threads, "worker threads");
  run_cmd->add_option("--out", run_opts.out, "CSV path (default stdout)");

  // tune
  Common tune_opts;
  std::string tune_algo = "sarah";
  std::vector<std::uint64_t> tune_seeds{0, 1, 2};
  std::optional<double> tune_passes;
  std::size_t tune_batch = 64;
  std::size_t tune_stride = 1;
  auto* tune_cmd = app.add_subcommand("tune", "grid-search a baseline and report the selected configuration");
  add_dataset_options(tune_cmd, tune_opts);
  tune_cmd->add_option("--algo", tune_algo, "sarah, sarah+, svrg, adam or sgdm")->capture_default_str();
  tune_cmd->add_option("--seeds,--seed", tune_seeds, "seeds (comma separated)")->delimiter(',');
  tune_cmd->add_option("--passes", tune_passes, "budget per run in effective passes (default per dataset)");
  tune_cmd->add_option("--batch", tune_batch, "mini-batch size")->capture_default_str();
  tune_cmd->add_option("--stride", tune_stride, "keep every n-th value of each grid axis")->capture_default_str();
  tune_cmd->add_option("--threads", tune_opts.threads, "worker threads");
  tune_cmd->add_option("--out", tune_opts.out, "sweep CSV path (default stdout)");

  // lipschitz
  Common lip_opts;
  bool lip_variants = false;
  auto* lip_cmd = app.add_subcommand("lipschitz", "print the global smoothness constant of the objective");
  add_dataset_options(lip_cmd, lip_opts);
  lip_cmd->add_flag("--variants", lip_variants, "also report the constant without the bias column and the per-sample bound");

  // theory
  Common th_opts;
  th_opts.dataset = "synthetic:20:3:0";
  std::string th_mode = "uniform";
  std::size_t th_m = 10;
  std::size_t th_loops = 5;
  std::uint64_t th_seed = 0;
  std::optional<double> th_lambda;
  auto* th_cmd = app.add_subcommand("theory", "run the full-information variant and write eta/L/sigma per step");
  add_dataset_options(th_cmd, th_opts);
  th_cmd->add_option("--mode", th_mode, "uniform or importance")->check(CLI::IsMember({"uniform", "importance"}));
  th_cmd->add_option("--m", th_m, "inner iterations per outer loop")->capture_default_str();
  th_cmd->add_option("--loops", th_loops, "outer loops")->capture_default_str();
  th_cmd->add_option("--seed", th_seed, "sampling seed")->capture_default_str();
  th_cmd->add_option("--lambda", th_lambda, "regularization (overrides --reg/--no-reg)");
  th_cmd->add_option("--out", th_opts.out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_usage;
  }

  try {
    if (*fetch_cmd) {
      std::vector<std::string> names = fetch_names;
      if (names.size() == 1 && names[0] == "all") {
        names.clear();
        for (const auto& d : dataset_registry) names.emplace_back(d.name);
      }
      for (const auto& n : names)
        if (!find_dataset(n)) throw UsageError("unknown dataset '" + n + "'; valid names: " + dataset_names());
      for (const auto& n : names) {
        const auto got = fetch(n, fetch_opts.dir());
        std::cout << n << '\t' << got.train.string();
        if (got.test) std::cout << '\t' << got.test->string();
        std::cout << (got.downloads ? "" : "\t(cached)") << '\n';
      }
      return 0;
    }

    if (*run_cmd) {
      ExperimentPlan plan;
      plan.algorithms = parse_algorithms(run_algos);
      plan.seeds = run_seeds;
      plan.reg = run_opts.reg;
      plan.step_size = run_step;
      plan.beta = run_beta;
      plan.threads = run_opts.threads;
      if (run_gamma) {
        plan.gamma = *run_gamma;
        plan.base.early_stop_gamma = *run_gamma;
      }
      plan.base.batch_size = run_batch;
      plan.base.metrics_interval = run_interval;
      plan.base.inner_passes = run_inner;
      if (!(run_interval > 0.0)) throw UsageError("--interval must be positive");
      const auto spec = parse_dataset_spec(run_opts.dataset);
      plan.budget = run_passes.value_or(default_budget(spec, run_opts.reg));
      const auto data = resolve(run_opts);
      plan.dataset = dataset_label(spec);
      if (run_batch == 0 || run_batch > data.train.n()) throw UsageError("--batch must lie in [1, n]");
      const auto records = run_experiment(plan, data.train, data.test ? &*data.test : nullptr);
      std::ostringstream csv;
      write_metrics_csv(csv, records);
      emit(run_opts.out, csv.str());
      return 0;
    }

    if (*tune_cmd) {
      const auto algo = parse_algorithm(tune_algo);
      if (!algo) throw UsageError("unknown algorithm '" + tune_algo + "'");
      if (*algo == Algorithm::ai_sarah) throw UsageError("ai-sarah has no tuning grid; tune a baseline");
      if (tune_stride == 0) throw UsageError("--stride must be >= 1");
      const auto spec = parse_dataset_spec(tune_opts.dataset);
      const auto data = resolve(tune_opts);
      if (tune_batch == 0 || tune_batch > data.train.n()) throw UsageError("--batch must lie in [1, n]");
      const LogisticModel model(data.train, regularization(tune_opts.reg, data.train.n()));
      RunConfig base;
      base.algorithm = *algo;
      base.batch_size = tune_batch;
      base.budget = tune_passes.value_or(default_budget(spec, tune_opts.reg));
      const auto grid = tuning_grid(*algo, global_lipschitz(model), tune_stride);
      const auto sweep = run_sweep(model, base, grid, tune_seeds, tune_opts.threads);
      std::ostringstream csv;
      write_sweep_csv(csv, sweep);
      emit(tune_opts.out, csv.str());

      auto& report = tune_opts.out.empty() || tune_opts.out == "-" ? std::cerr : std::cout;
      report << algorithm_name(*algo) << ": " << grid.size() << " configurations x " << tune_seeds.size()
             << " seeds\n";
      if (!sweep.selection.best) {
        report << "no stable configuration\n";
        return exit_failure;
      }
      const auto c = *sweep.selection.best;
      const auto& p = grid[c];
      report << "selected config " << c << ": step_size=" << format_double(p.step_size);
      if (p.inner_passes) report << " inner_passes=" << format_double(*p.inner_passes);
      if (p.gamma) report << " gamma=" << format_double(*p.gamma);
      if (p.decay_percent) report << " decay_percent=" << format_double(*p.decay_percent);
      report << " mean_final_loss=" << format_double(sweep.selection.mean_final_loss[c]) << '\n';
      return 0;
    }

    if (*lip_cmd) {
      const auto data = resolve(lip_opts);
      const LogisticModel model(data.train, regularization(lip_opts.reg, data.train.n()));
      std::cout << six(global_lipschitz(model)) << '\n';
      if (lip_variants) {
        std::cout << "without_bias " << six(global_lipschitz(model, /*include_bias=*/false)) << '\n';
        std::cout << "max_sample " << six(model.max_sample_smoothness()) << '\n';
        std::cout << "n " << data.train.n() << " raw_features " << data.raw_features << " lambda "
                  << format_double(model.lambda()) << '\n';
      }
      return 0;
    }

    if (*th_cmd) {
      const auto spec = parse_dataset_spec(th_opts.dataset);
      if (spec.kind == DatasetSpec::Kind::synthetic || spec.kind == DatasetSpec::Kind::sparse) {
        if (spec.synthetic.n > theory_max_rows)
          throw UsageError("theory runs recompute all n local constants after every step (cost n * m per loop); n = " +
                           std::to_string(spec.synthetic.n) + " exceeds the limit of " +
                           std::to_string(theory_max_rows));
      }
      const auto data = resolve(th_opts);
      if (data.train.n() > theory_max_rows)
        throw UsageError("theory runs recompute all n local constants after every step (cost n * m per loop); n = " +
                         std::to_string(data.train.n()) + " exceeds the limit of " + std::to_string(theory_max_rows));
      const double lambda = th_lambda.value_or(regularization(th_opts.reg, data.train.n()));
      const LogisticModel model(data.train, lambda);
      TheoryConfig config;
      config.inner_size = th_m;
      config.outer_loops = th_loops;
      config.mode = th_mode == "importance" ? SamplingMode::importance : SamplingMode::uniform;
      config.seed = th_seed;
      const auto run = theoretical_run(model, config);
      for (const auto& w : run.warnings) std::cerr << "warning: " << w << '\n';
      std::ostringstream csv;
      write_theory_csv(csv, run);
      emit(th_opts.out, csv.str());
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_failure;
  }
  return exit_usage;
}
