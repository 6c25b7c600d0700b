#pragma once

// Dataset resolution (registry names, generated data, explicit files) and
// multi-seed, multi-algorithm runs merged into deterministic records.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aisarah/csv.hpp"
#include "aisarah/datasets.hpp"
#include "aisarah/linear_model.hpp"
#include "aisarah/optimizers.hpp"
#include "aisarah/parallel.hpp"
#include "aisarah/synthetic.hpp"

namespace aisarah {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A dataset argument:
///   registry name            e.g. "a1a"
///   synthetic:N:F:SEED       dense Gaussian features, hyperplane labels
///   sparse:N:F:SEED          sparse 0/1 features, noisy hyperplane labels
///   file:TRAIN[,TEST]        LIBSVM files on disk
struct DatasetSpec {
  enum class Kind { registry, synthetic, sparse, file } kind = Kind::registry;
  std::string text;
  const DatasetInfo* info = nullptr;
  SyntheticOptions synthetic;
  std::filesystem::path train_file;
  std::optional<std::filesystem::path> test_file;
};

namespace detail {

inline std::uint64_t parse_count(std::string_view s, std::string_view what) {
  if (s.empty()) throw UsageError("missing " + std::string(what));
  std::uint64_t v = 0;
  for (const char c : s) {
    if (c < '0' || c > '9') throw UsageError("bad " + std::string(what) + " '" + std::string(s) + "'");
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

}  // namespace detail

inline DatasetSpec parse_dataset_spec(std::string_view text) {
  DatasetSpec spec;
  spec.text = std::string(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    spec.info = find_dataset(text);
    if (!spec.info) throw UsageError("unknown dataset '" + std::string(text) + "'; valid names: " + dataset_names());
    return spec;
  }
  const auto kind = text.substr(0, colon);
  const auto rest = text.substr(colon + 1);
  if (kind == "file") {
    spec.kind = DatasetSpec::Kind::file;
    const auto comma = rest.find(',');
    spec.train_file = std::string(rest.substr(0, comma));
    if (comma != std::string_view::npos) spec.test_file = std::string(rest.substr(comma + 1));
    if (spec.train_file.empty()) throw UsageError("file: needs a training path");
    return spec;
  }
  if (kind != "synthetic" && kind != "sparse") throw UsageError("unknown dataset kind '" + std::string(kind) + "'");
  spec.kind = kind == "synthetic" ? DatasetSpec::Kind::synthetic : DatasetSpec::Kind::sparse;
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto c = rest.find(':', start);
    parts.push_back(rest.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start));
    if (c == std::string_view::npos) break;
    start = c + 1;
  }
  if (parts.size() != 3) throw UsageError(std::string(kind) + " datasets are written " + std::string(kind) + ":N:F:SEED");
  spec.synthetic.n = detail::parse_count(parts[0], "row count");
  spec.synthetic.features = detail::parse_count(parts[1], "feature count");
  spec.synthetic.seed = detail::parse_count(parts[2], "seed");
  if (spec.kind == DatasetSpec::Kind::sparse) spec.synthetic.label_noise = 0.05;
  if (spec.synthetic.n < 2 || spec.synthetic.features == 0) throw UsageError("generated data needs N >= 2 and F >= 1");
  return spec;
}

/// CSV-safe short name for the dataset column.
inline std::string dataset_label(const DatasetSpec& spec) {
  if (spec.kind == DatasetSpec::Kind::file) return spec.train_file.filename().string();
  return spec.text;
}

/// Effective-pass budget used when none is given.
inline double default_budget(const DatasetSpec& spec, bool reg) noexcept {
  if (spec.info) return reg ? spec.info->budget_reg : spec.info->budget_noreg;
  return 20.0;
}

/// Materialize a spec. Registry datasets must already be in `dir` (see fetch).
inline LoadedData load_dataset(const DatasetSpec& spec, const std::filesystem::path& dir,
                               std::uint64_t split_seed = default_split_seed) {
  switch (spec.kind) {
    case DatasetSpec::Kind::registry: return load_registered(*spec.info, dir, split_seed);
    case DatasetSpec::Kind::file: {
      const auto train = read_libsvm_file(spec.train_file);
      if (spec.test_file) {
        const auto test = read_libsvm_file(*spec.test_file);
        return load_pair(dataset_label(spec), train, &test);
      }
      return load_pair(dataset_label(spec), train, nullptr);
    }
    case DatasetSpec::Kind::synthetic:
    case DatasetSpec::Kind::sparse: {
      LoadedData out;
      out.name = spec.text;
      out.train = spec.kind == DatasetSpec::Kind::synthetic ? make_gaussian_dataset(spec.synthetic)
                                                            : make_sparse_binary_dataset(spec.synthetic);
      out.raw_features = spec.synthetic.features;
      out.parsed_rows = out.train.n();
      out.parsed_max_index = spec.synthetic.features;
      return out;
    }
  }
  throw std::logic_error("unhandled dataset kind");
}

/// lambda = 1/n when regularized, else 0.
inline double regularization(bool reg, std::size_t n) noexcept { return reg ? 1.0 / static_cast<double>(n) : 0.0; }

struct ExperimentPlan {
  std::string dataset;  // CSV label
  bool reg = true;
  std::vector<Algorithm> algorithms{Algorithm::ai_sarah};
  std::vector<std::uint64_t> seeds{0};
  double budget = 30.0;
  /// Shared settings; algorithm, seed, budget and test are filled per run.
  RunConfig base;
  /// Step size for the baselines; default depends on the method (see baseline_step).
  std::optional<double> step_size;
  double gamma = 1.0 / 32.0;
  double beta = 0.999;
  std::size_t threads = default_thread_count();
};

/// Untuned step sizes: 1/(2L) for the constant-step estimators, 0.01 for
/// ADAM and 0.1 for SGD with momentum.
inline double baseline_step(Algorithm a, double L) noexcept {
  switch (a) {
    case Algorithm::adam: return 0.01;
    case Algorithm::sgd_momentum: return 0.1;
    default: return 0.5 / L;
  }
}

/// Every (algorithm, seed) pair, run concurrently; results are in plan order.
inline std::vector<RunRecord> run_experiment(const ExperimentPlan& plan, const SparseDataset& train,
                                             const SparseDataset* test) {
  if (plan.seeds.empty()) throw UsageError("at least one seed is required");
  if (plan.algorithms.empty()) throw UsageError("at least one algorithm is required");
  if (!(plan.budget > 0.0)) throw UsageError("budget must be positive");
  const LogisticModel model(train, regularization(plan.reg, train.n()));
  std::optional<double> L;
  for (const auto a : plan.algorithms)
    if (a != Algorithm::ai_sarah && !plan.step_size && !L) L = global_lipschitz(model);

  std::vector<RunRecord> records(plan.algorithms.size() * plan.seeds.size());
  parallel_for(records.size(), plan.threads, [&](std::size_t job) {
    const Algorithm algo = plan.algorithms[job / plan.seeds.size()];
    RunConfig config = plan.base;
    config.algorithm = algo;
    config.seed = plan.seeds[job % plan.seeds.size()];
    config.budget = plan.budget;
    config.test = test;
    if (algo != Algorithm::ai_sarah) config.step_size = plan.step_size ? *plan.step_size : baseline_step(algo, *L);
    auto run = run_algorithm(model, config, StepSizeController(plan.gamma, plan.beta));
    records[job] = RunRecord{plan.dataset, std::string(algorithm_name(algo)), plan.reg, config.seed, std::move(run.rows)};
  });
  return records;
}

}  // namespace aisarah
