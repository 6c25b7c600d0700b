#pragma once

// CSV output for trajectories and theory runs. Floats are printed with 17
// significant digits so files round-trip exactly; empty fields mean "not
// applicable".

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "aisarah/run_state.hpp"
#include "aisarah/theory.hpp"

namespace aisarah {

inline constexpr std::array<std::string_view, 11> metrics_columns = {
    "dataset", "algo",         "reg",     "seed",       "effective_pass", "wall_clock_s",
    "loss",    "grad_norm_sq", "step_size", "alpha_max", "test_accuracy"};

inline constexpr std::array<std::string_view, 7> theory_columns = {"k", "t", "eta", "L_aggregate", "H", "sigma", "p_sum"};

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_optional(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

template <std::size_t N>
std::string csv_header(const std::array<std::string_view, N>& columns) {
  std::string out;
  for (std::size_t i = 0; i < N; ++i) {
    if (i) out += ',';
    out += columns[i];
  }
  return out;
}

/// One trajectory: a (dataset, algorithm, reg, seed) group of rows.
struct RunRecord {
  std::string dataset;
  std::string algo;
  bool reg = true;
  std::uint64_t seed = 0;
  std::vector<MetricsRow> rows;
};

/// Header plus every row, sorted by (algo, seed, effective_pass). The sort is
/// stable, so input order breaks remaining ties.
inline void write_metrics_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  struct Ref {
    const RunRecord* record;
    const MetricsRow* row;
  };
  std::vector<Ref> refs;
  for (const auto& rec : records)
    for (const auto& row : rec.rows) refs.push_back({&rec, &row});
  std::stable_sort(refs.begin(), refs.end(), [](const Ref& a, const Ref& b) {
    return std::tie(a.record->algo, a.record->seed, a.row->effective_pass) <
           std::tie(b.record->algo, b.record->seed, b.row->effective_pass);
  });

  out << csv_header(metrics_columns) << '\n';
  for (const auto& [rec, row] : refs) {
    out << rec->dataset << ',' << rec->algo << ',' << (rec->reg ? 1 : 0) << ',' << rec->seed << ','
        << format_double(row->effective_pass) << ',' << format_double(row->wall_clock_s) << ','
        << format_double(row->loss) << ',' << format_double(row->grad_norm_sq) << ','
        << format_optional(row->step_size) << ',' << format_optional(row->alpha_max) << ','
        << format_optional(row->test_accuracy) << '\n';
  }
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

/// A parsed metrics line; numeric columns stay optional so empty fields survive.
struct CsvMetricsRow {
  std::string dataset;
  std::string algo;
  bool reg = true;
  std::uint64_t seed = 0;
  double effective_pass = 0.0;
  double wall_clock_s = 0.0;
  double loss = 0.0;
  double grad_norm_sq = 0.0;
  std::optional<double> step_size;
  std::optional<double> alpha_max;
  std::optional<double> test_accuracy;
};

namespace detail {

inline double parse_csv_double(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw std::runtime_error("line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

inline std::optional<double> parse_csv_optional(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  return parse_csv_double(s, line);
}

}  // namespace detail

/// Reads a file written by write_metrics_csv; the header must match exactly.
inline std::vector<CsvMetricsRow> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header(metrics_columns))
    throw std::runtime_error("unexpected metrics CSV header");
  std::vector<CsvMetricsRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != metrics_columns.size())
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected 11 fields");
    CsvMetricsRow r;
    r.dataset = f[0];
    r.algo = f[1];
    r.reg = f[2] == "1";
    r.seed = std::stoull(f[3]);
    r.effective_pass = detail::parse_csv_double(f[4], lineno);
    r.wall_clock_s = detail::parse_csv_double(f[5], lineno);
    r.loss = detail::parse_csv_double(f[6], lineno);
    r.grad_norm_sq = detail::parse_csv_double(f[7], lineno);
    r.step_size = detail::parse_csv_optional(f[8], lineno);
    r.alpha_max = detail::parse_csv_optional(f[9], lineno);
    r.test_accuracy = detail::parse_csv_optional(f[10], lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Drops the wall_clock_s field from every data line; what remains is the
/// deterministic part of a metrics file.
inline std::string strip_wall_clock(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    auto f = split_csv_line(line);
    if (f.size() > 5) f.erase(f.begin() + 5);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) out += ',';
      out += f[i];
    }
    out += '\n';
  }
  return out;
}

/// One line per (k, t); sigma repeats the loop's value on each of its lines
/// and H is the running sum eta_0 + ... + eta_t.
inline void write_theory_csv(std::ostream& out, const TheoryRun& run) {
  out << csv_header(theory_columns) << '\n';
  for (const auto& s : run.steps) {
    const auto& loop = run.loops.at(s.outer - 1);
    out << s.outer << ',' << s.inner << ',' << format_double(s.eta) << ',' << format_double(s.L_aggregate) << ','
        << format_double(s.H) << ',' << format_double(loop.sigma.sigma) << ',' << format_double(s.p_sum) << '\n';
  }
}

}  // namespace aisarah
