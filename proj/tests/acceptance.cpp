// Acceptance checks, one per numbered criterion. Prints one line per
// criterion: PASS, FAIL, or BLOCKED (dataset not obtainable). With
// --criterion N only that check runs and the exit code is 0 / 1 / 77.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "aisarah/csv.hpp"
#include "aisarah/datasets.hpp"
#include "aisarah/fetch.hpp"
#include "aisarah/optimizers.hpp"
#include "aisarah/synthetic.hpp"
#include "aisarah/theory.hpp"
#include "least_squares.hpp"

namespace fs = std::filesystem;
using namespace aisarah;

namespace {

enum class Status { pass, fail, blocked };

struct Outcome {
  Status status;
  std::string detail;
};

class Blocked : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

fs::path data_dir() {
  if (const char* env = std::getenv("DATA_DIR"); env && *env) return env;
  return AISARAH_DEFAULT_DATA_DIR;
}

/// Fetch (or reuse) a registry dataset; a failed download means the check is blocked.
LoadedData obtain(const std::string& name) {
  try {
    fetch(name, data_dir());
  } catch (const FetchError& e) {
    throw Blocked(name + " not in " + data_dir().string() + " and not downloadable (" + e.what() + ")");
  }
  return load_registered(*find_dataset(name), data_dir());
}

struct Shell {
  int status = -1;
  std::string out;
};

Shell shell(const std::string& cmd) {
  Shell r;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string cli() { return AISARAH_CLI; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double rel_vec(const Vector& a, const Vector& b) {
  double num = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) num += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(num) / std::max(norm(b), 1e-300);
}

// 1. Global L of a1a.
Outcome global_l() {
  obtain("a1a");
  const auto t0 = Clock::now();
  const std::string base = cli() + " lipschitz --dataset a1a --data-dir " + data_dir().string();
  const auto reg = shell(base + " --reg");
  const auto noreg = shell(base + " --no-reg");
  const double elapsed = seconds_since(t0);
  if (reg.status != 0 || noreg.status != 0) return {Status::fail, "lipschitz command failed: " + reg.out + noreg.out};
  const double L_reg = std::stod(reg.out);
  const double L_noreg = std::stod(noreg.out);
  const bool ok = std::abs(L_reg - 0.362456) <= 5e-3 && std::abs(L_noreg - 0.361833) <= 5e-3 && elapsed < 10.0;
  std::string detail = "L(reg)=" + fmt("%.6f", L_reg) + " (0.362456), L(no-reg)=" + fmt("%.6f", L_noreg) +
                       " (0.361833), " + fmt("%.2f", elapsed) + " s";
  if (!ok) {
    const auto variants = shell(base + " --reg --variants");
    std::string flat = variants.out;
    std::replace(flat.begin(), flat.end(), '\n', ' ');
    detail += "; variants: " + flat;
  }
  return {ok ? Status::pass : Status::fail, detail};
}

// 2. One Newton step on xi is exact for the quadratic loss.
Outcome quadratic_exactness() {
  const auto data = make_gaussian_dataset({64, 10, 2, 0.0});
  const LinearModel<testing_support::SquaredLoss> model(data, 0.0);
  Rng rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector w = gaussian_vector(rng, model.d(), 1.0);
    const Vector v = gaussian_vector(rng, model.d(), 1.0);
    const std::size_t batch[1] = {static_cast<std::size_t>(trial) % model.n()};
    const auto step = one_step_newton(model.xi_derivatives(w, v, batch));
    if (!step) return {Status::fail, "degenerate probe"};
    worst = std::max(worst, rel(*step, 1.0 / data.row(batch[0]).squared_norm()));
  }
  return {worst <= 1e-12 ? Status::pass : Status::fail, "max rel err " + fmt("%.3g", worst) + " over 100 rows (<= 1e-12)"};
}

// 3. Finite-difference oracles on a1a.
Outcome derivative_oracles() {
  const auto data = obtain("a1a");
  const auto t0 = Clock::now();
  const LogisticModel model(data.train, 1.0 / data.train.n());
  Rng rng(2024);
  BatchSampler sampler(model.n(), 64);
  double worst_full = 0.0, worst_batch = 0.0, worst_xi1 = 0.0, worst_xi2 = 0.0;
  const double h = 1e-5;
  const double hx = 1e-4;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector w = gaussian_vector(rng, model.d(), 1.0);
    const Vector v = gaussian_vector(rng, model.d(), 1.0);
    const auto& batch = sampler.next(rng);

    const Vector g = model.full_gradient(w);
    const Vector gb = model.minibatch_gradient(w, batch);
    Vector fd(model.d()), fdb(model.d());
    for (std::size_t j = 0; j < model.d(); ++j) {
      Vector wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      fd[j] = (model.loss(wp) - model.loss(wm)) / (2 * h);
      fdb[j] = (model.batch_loss(wp, batch) - model.batch_loss(wm, batch)) / (2 * h);
    }
    worst_full = std::max(worst_full, rel_vec(g, fd));
    worst_batch = std::max(worst_batch, rel_vec(gb, fdb));

    // xi(a) - xi(0) = 2 v'r(a) + |r(a)|^2 with r(a) = grad f_S(w - a v) - grad f_S(w).
    auto shifted_xi = [&](double a) {
      Vector wa = w;
      axpy(-a, v, wa);
      const Vector ga = model.minibatch_gradient(wa, batch);
      double acc = 0.0;
      for (std::size_t j = 0; j < ga.size(); ++j) {
        const double r = ga[j] - gb[j];
        acc += 2 * v[j] * r + r * r;
      }
      return acc;
    };
    const double fp = shifted_xi(hx);
    const double fm = shifted_xi(-hx);
    const auto probe = model.xi_derivatives(w, v, batch);
    worst_xi1 = std::max(worst_xi1, rel(probe.xi_prime0, (fp - fm) / (2 * hx)));
    worst_xi2 = std::max(worst_xi2, rel(probe.xi_double_prime0, (fp + fm) / (hx * hx)));
  }
  const double elapsed = seconds_since(t0);
  const bool ok = worst_full <= 1e-6 && worst_batch <= 1e-6 && worst_xi1 <= 1e-4 && worst_xi2 <= 1e-4 && elapsed < 30;
  return {ok ? Status::pass : Status::fail,
          "grad " + fmt("%.2g", worst_full) + ", batch grad " + fmt("%.2g", worst_batch) + " (<= 1e-6); xi' " +
              fmt("%.2g", worst_xi1) + ", xi'' " + fmt("%.2g", worst_xi2) + " (<= 1e-4); " + fmt("%.1f", elapsed) + " s"};
}

// 4. Pinned AI-SARAH reproduces SARAH.
Outcome sarah_equivalence() {
  const auto a1a = obtain("a1a");
  const auto mushrooms = obtain("mushrooms");
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string detail;
  for (const auto* data : {&a1a, &mushrooms}) {
    const LogisticModel model(data->train, 1.0 / data->train.n());
    const double L = global_lipschitz(model);
    for (const std::uint64_t seed : {0u, 1u}) {
      RunConfig sarah;
      sarah.algorithm = Algorithm::sarah;
      sarah.seed = seed;
      sarah.budget = 2.0;
      sarah.step_size = 1.0 / (2.0 * L);
      sarah.inner_passes = 1.0;
      sarah.record_iterates = true;
      RunConfig ai = sarah;
      ai.algorithm = Algorithm::ai_sarah;
      ai.pinned_step = sarah.step_size;
      ai.inner_cap = inner_iterations(sarah.inner_passes, model.n(), sarah.batch_size);
      const auto ref = run_sarah(model, sarah);
      const auto got = run_ai_sarah(model, ai, StepSizeController(0.0, 0.999));
      if (ref.iterates.size() != got.iterates.size()) return {Status::fail, data->name + ": iterate counts differ"};
      for (std::size_t k = 0; k < ref.iterates.size(); ++k)
        worst = std::max(worst, max_abs_difference(ref.iterates[k], got.iterates[k]));
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-12 && elapsed < 60 ? Status::pass : Status::fail,
          "max coordinate deviation " + fmt("%.3g", worst) + " (<= 1e-12) on a1a, mushrooms x 2 seeds; " +
              fmt("%.1f", elapsed) + " s"};
}

SparseDataset theory_instance() { return make_gaussian_dataset({50, 5, 2021, 0.0}); }

// 5. Steps and horizon dominate classical SARAH's.
Outcome step_dominance() {
  const auto t0 = Clock::now();
  const auto data = theory_instance();
  const LogisticModel model(data, 0.02);
  TheoryConfig config;
  config.inner_size = 20;
  config.outer_loops = 5;
  const auto run = theoretical_run(model, config);
  const double L_global = model.max_sample_smoothness();
  double min_eta_ratio = std::numeric_limits<double>::infinity();
  double min_H_ratio = std::numeric_limits<double>::infinity();
  for (const auto& loop : run.loops) {
    min_eta_ratio = std::min(min_eta_ratio, loop.min_eta * L_global);
    min_H_ratio = std::min(min_H_ratio, loop.H * L_global / 21.0);
  }
  const double elapsed = seconds_since(t0);
  const bool ok = min_eta_ratio >= 1.0 && min_H_ratio >= 1.0 && elapsed < 10 && run.loops.size() == 5;
  return {ok ? Status::pass : Status::fail,
          "min eta_t * L = " + fmt("%.6f", min_eta_ratio) + ", min H L/(m+1) = " + fmt("%.6f", min_H_ratio) +
              " (both >= 1), L = " + fmt("%.6f", L_global) + ", P-level L = " + fmt("%.6f", global_lipschitz(model)) +
              "; " + fmt("%.2f", elapsed) + " s"};
}

// 6. Median gradient norm contracts across outer loops.
Outcome contraction() {
  const auto t0 = Clock::now();
  const auto data = theory_instance();
  const LogisticModel model(data, 0.02);
  const double L_max = model.max_sample_smoothness();
  const double alpha = 1.0 / (3.0 * L_max);
  const auto m = static_cast<std::size_t>(std::ceil(10.0 / (model.mu() * alpha))) - 1;
  const auto sigma = bounded_sigma(model.mu(), alpha, alpha, m, L_max);
  if (!sigma.contracts()) return {Status::fail, "sigma = " + fmt("%.4f", sigma.sigma) + " is not < 1"};

  constexpr std::size_t seeds = 50;
  std::vector<std::vector<double>> per_k(6, std::vector<double>(seeds));
  for (std::size_t s = 0; s < seeds; ++s) {
    BoundedAltConfig config;
    config.inner_size = m;
    config.alpha_min = config.alpha_max = alpha;
    config.outer_loops = 5;
    config.seed = s;
    const auto run = bounded_alt_run(model, config);
    per_k[0][s] = run.initial_grad_norm_sq;
    for (std::size_t k = 0; k < 5; ++k) per_k[k + 1][s] = run.loops[k].grad_norm_sq;
  }
  std::vector<double> medians;
  for (auto& col : per_k) {
    std::sort(col.begin(), col.end());
    medians.push_back(0.5 * (col[seeds / 2 - 1] + col[seeds / 2]));
  }
  bool ok = true;
  for (std::size_t k = 2; k <= 5; ++k) ok = ok && medians[k] <= medians[k - 1];
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed < 120;
  std::string detail = "m = " + std::to_string(m) + ", sigma = " + fmt("%.4f", sigma.sigma) + ", medians k=0..5:";
  for (const double x : medians) detail += " " + fmt("%.3e", x);
  return {ok ? Status::pass : Status::fail, detail + "; " + fmt("%.1f", elapsed) + " s"};
}

std::string convergence_command(const fs::path& out) {
  return cli() + " run --dataset a1a --reg --algo ai-sarah --seeds 0,1,2,3,4,5,6,7,8,9 --batch 64 --gamma 0.03125" +
         " --beta 0.999 --passes 30 --data-dir " + data_dir().string() + " --out " + out.string();
}

// 7. Default AI-SARAH on a1a.
Outcome convergence() {
  obtain("a1a");
  const auto out = fs::temp_directory_path() / "aisarah-acceptance-7.csv";
  const auto t0 = Clock::now();
  const auto r = shell(convergence_command(out));
  const double elapsed = seconds_since(t0);
  if (r.status != 0) return {Status::fail, "run failed: " + r.out};
  std::ifstream in(out);
  const auto rows = read_metrics_csv(in);
  std::map<std::uint64_t, std::vector<const CsvMetricsRow*>> by_seed;
  for (const auto& row : rows) by_seed[row.seed].push_back(&row);
  bool ok = by_seed.size() == 10 && elapsed < 300;
  double worst_ratio = 0.0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  double min_final_pass = std::numeric_limits<double>::infinity();
  for (const auto& [seed, traj] : by_seed) {
    const double p0 = traj.front()->loss;
    for (const auto* row : traj) worst_excess = std::max(worst_excess, row->loss - p0);
    worst_ratio = std::max(worst_ratio, traj.back()->grad_norm_sq / traj.front()->grad_norm_sq);
    min_final_pass = std::min(min_final_pass, traj.back()->effective_pass);
  }
  ok = ok && worst_excess <= 0.0 && worst_ratio <= 1e-3 && min_final_pass >= 30.0;
  fs::remove(out);
  return {ok ? Status::pass : Status::fail,
          "10 seeds: max(loss - P(w0)) = " + fmt("%.3g", worst_excess) + " (<= 0), max |grad|^2 ratio " +
              fmt("%.3g", worst_ratio) + " (<= 1e-3), final pass >= " + fmt("%.2f", min_final_pass) + "; " +
              fmt("%.1f", elapsed) + " s"};
}

// 8. Controller arithmetic.
Outcome controller_arithmetic() {
  StepSizeController c(1.0 / 32.0, 0.999);
  c.update(2.0);
  const double d1 = *c.delta();
  const double a1 = c.alpha_max();
  c.update(1.0);
  const double d2 = *c.delta();
  const double a2 = c.alpha_max();
  const bool ok = d1 == 0.5 && a1 == 2.0 && d2 == 0.5005 && a2 == 1.0 / 0.5005;
  return {ok ? Status::pass : Status::fail, "delta " + fmt("%.17g", d1) + " -> " + fmt("%.17g", d2) + ", alpha_max " +
                                                fmt("%.17g", a1) + " -> " + fmt("%.17g", a2)};
}

// 9. Parsed dataset sizes.
Outcome dataset_statistics() {
  std::string detail;
  bool ok = true;
  for (const auto& [name, n, d] : {std::tuple{"ijcnn1", 49990u, 22u}, std::tuple{"a1a", 1605u, 123u}}) {
    const auto data = obtain(name);
    const auto test_max = data.test ? read_libsvm_file(data_dir() / local_name(find_dataset(name)->test_remote)).max_feature_index : 0;
    const auto raw_d = std::max(data.parsed_max_index, test_max);
    ok = ok && data.parsed_rows == n && raw_d == d;
    detail += std::string(name) + " (n, d) = (" + std::to_string(data.parsed_rows) + ", " + std::to_string(raw_d) +
              ") expected (" + std::to_string(n) + ", " + std::to_string(d) + "); ";
  }
  return {ok ? Status::pass : Status::fail, detail};
}

// 10. Criterion-7 run repeated.
Outcome determinism() {
  obtain("a1a");
  const auto a = fs::temp_directory_path() / "aisarah-acceptance-10a.csv";
  const auto b = fs::temp_directory_path() / "aisarah-acceptance-10b.csv";
  const auto ra = shell(convergence_command(a));
  const auto rb = shell(convergence_command(b));
  if (ra.status != 0 || rb.status != 0) return {Status::fail, "run failed: " + ra.out + rb.out};
  const auto sa = slurp(a);
  const auto sb = slurp(b);
  fs::remove(a);
  fs::remove(b);
  const bool same = strip_wall_clock(sa) == strip_wall_clock(sb);
  return {same && !sa.empty() ? Status::pass : Status::fail,
          std::string(same ? "identical" : "different") + " CSV modulo wall_clock_s (" + std::to_string(sa.size()) + " bytes)"};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> list = {
      {"global Lipschitz constant of a1a", global_l},
      {"one-step Newton exact on quadratics", quadratic_exactness},
      {"derivative oracles on a1a", derivative_oracles},
      {"pinned AI-SARAH reproduces SARAH", sarah_equivalence},
      {"adaptive steps dominate 1/L", step_dominance},
      {"bounded-step contraction", contraction},
      {"AI-SARAH convergence on a1a", convergence},
      {"step-size controller arithmetic", controller_arithmetic},
      {"dataset statistics", dataset_statistics},
      {"determinism of repeated runs", determinism},
  };
  return list;
}

Status run_one(std::size_t k) {
  const auto& [name, check] = criteria()[k - 1];
  Outcome o;
  try {
    o = check();
  } catch (const Blocked& e) {
    o = {Status::blocked, e.what()};
  } catch (const std::exception& e) {
    o = {Status::fail, std::string("exception: ") + e.what()};
  }
  const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "BLOCKED";
  std::cout << "criterion " << k << " [" << tag << "] " << name << ": " << o.detail << std::endl;
  return o.status;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc == 3 && std::strcmp(argv[1], "--criterion") == 0) {
    const auto k = static_cast<std::size_t>(std::atoi(argv[2]));
    if (k < 1 || k > criteria().size()) {
      std::cerr << "criterion must be 1.." << criteria().size() << '\n';
      return 2;
    }
    const auto s = run_one(k);
    return s == Status::pass ? 0 : s == Status::blocked ? 77 : 1;
  }
  if (argc != 1) {
    std::cerr << "usage: acceptance [--criterion N]\n";
    return 2;
  }
  bool failed = false;
  for (std::size_t k = 1; k <= criteria().size(); ++k) failed = run_one(k) == Status::fail || failed;
  return failed ? 1 : 0;
}
