#pragma once

// CSR storage for LIBSVM-style binary classification data, plus parsing,
// preprocessing (unit-norm rows + bias column) and seeded train/test splits.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace aisarah {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Read-only view of one sparse row.
struct RowView {
  std::span<const std::uint32_t> indices;
  std::span<const double> values;

  std::size_t nnz() const noexcept { return indices.size(); }

  double dot(std::span<const double> w) const noexcept {
    double acc = 0.0;
    for (std::size_t k = 0; k < indices.size(); ++k) acc += values[k] * w[indices[k]];
    return acc;
  }

  double squared_norm() const noexcept {
    double acc = 0.0;
    for (const double v : values) acc += v * v;
    return acc;
  }

  /// out += scale * row
  void axpy(double scale, std::span<double> out) const noexcept {
    for (std::size_t k = 0; k < indices.size(); ++k) out[indices[k]] += scale * values[k];
  }
};

/// CSR rows shared by the raw (pre-normalization) and the final dataset.
/// Column indices are 0-based here; the LIBSVM text format is 1-based.
struct CsrRows {
  std::vector<std::size_t> row_offsets{0};
  std::vector<std::uint32_t> col_indices;
  std::vector<double> values;

  std::size_t rows() const noexcept { return row_offsets.size() - 1; }

  RowView row(std::size_t i) const noexcept {
    const auto begin = row_offsets[i];
    const auto len = row_offsets[i + 1] - begin;
    return {std::span<const std::uint32_t>(col_indices).subspan(begin, len),
            std::span<const double>(values).subspan(begin, len)};
  }

  void push_entry(std::uint32_t col, double value) {
    col_indices.push_back(col);
    values.push_back(value);
  }

  void finish_row() { row_offsets.push_back(col_indices.size()); }
};

/// Parsed LIBSVM file: labels as written, features as written.
struct RawDataset {
  CsrRows rows;
  std::vector<double> labels;
  /// Largest 1-based feature index seen (0 when every row is empty).
  std::size_t max_feature_index = 0;

  std::size_t n() const noexcept { return labels.size(); }
};

/// Preprocessed training/testing corpus: labels in {-1,+1}, each non-bias
/// sub-row of unit Euclidean norm (or zero) and column d-1 constant 1.
struct SparseDataset {
  std::size_t d = 0;
  CsrRows rows;
  std::vector<double> labels;

  std::size_t n() const noexcept { return labels.size(); }
  RowView row(std::size_t i) const noexcept { return rows.row(i); }

  const std::vector<std::size_t>& row_offsets() const noexcept { return rows.row_offsets; }
  const std::vector<std::uint32_t>& col_indices() const noexcept { return rows.col_indices; }
  const std::vector<double>& values() const noexcept { return rows.values; }

  double nonzero_fraction() const noexcept {
    if (n() == 0 || d == 0) return 0.0;
    return static_cast<double>(rows.values.size()) / (static_cast<double>(n()) * static_cast<double>(d));
  }

  /// Rows in the given order, same dimension.
  SparseDataset subset(std::span<const std::size_t> order) const {
    SparseDataset out;
    out.d = d;
    out.labels.reserve(order.size());
    for (const auto i : order) {
      const auto r = row(i);
      for (std::size_t k = 0; k < r.nnz(); ++k) out.rows.push_entry(r.indices[k], r.values[k]);
      out.rows.finish_row();
      out.labels.push_back(labels[i]);
    }
    return out;
  }
};

struct DatasetSplit {
  SparseDataset train;
  SparseDataset test;
  std::uint64_t split_seed = 0;
  double fraction = 0.0;
  /// Source row index of every train/test row.
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline bool parse_double(std::string_view tok, double& out) {
  // strtod accepts forms ("+1", "1e-3", "inf") that from_chars rejects
  // in some implementations, so go through a bounded copy.
  if (tok.empty() || tok.size() > 64) return false;
  char buf[65];
  tok.copy(buf, tok.size());
  buf[tok.size()] = '\0';
  char* end = nullptr;
  out = std::strtod(buf, &end);
  return end == buf + tok.size() && std::isfinite(out);
}

}  // namespace detail

/// Parse LIBSVM text: `label idx:val idx:val ...`, 1-based strictly
/// increasing indices. Blank lines and `#` comments are skipped.
inline RawDataset parse_libsvm(std::istream& in) {
  RawDataset raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;

    std::size_t pos = 0;
    auto next_token = [&]() -> std::string_view {
      while (pos < view.size() && (view[pos] == ' ' || view[pos] == '\t')) ++pos;
      const auto start = pos;
      while (pos < view.size() && view[pos] != ' ' && view[pos] != '\t') ++pos;
      return view.substr(start, pos - start);
    };

    double label = 0.0;
    const auto label_tok = next_token();
    if (!detail::parse_double(label_tok, label))
      throw ParseError(line_no, "non-numeric label '" + std::string(label_tok) + "'");

    std::size_t prev_index = 0;
    for (auto tok = next_token(); !tok.empty(); tok = next_token()) {
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw ParseError(line_no, "expected idx:val, got '" + std::string(tok) + "'");
      std::size_t index = 0;
      const auto idx_tok = tok.substr(0, colon);
      const auto [ptr, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), index);
      if (ec != std::errc{} || ptr != idx_tok.data() + idx_tok.size() || index == 0)
        throw ParseError(line_no, "invalid feature index '" + std::string(idx_tok) + "'");
      if (index <= prev_index)
        throw ParseError(line_no, "feature indices must be strictly increasing (" + std::to_string(index) +
                                      " after " + std::to_string(prev_index) + ")");
      if (index > std::numeric_limits<std::uint32_t>::max())
        throw ParseError(line_no, "feature index too large");
      double value = 0.0;
      const auto val_tok = tok.substr(colon + 1);
      if (!detail::parse_double(val_tok, value))
        throw ParseError(line_no, "non-numeric feature value '" + std::string(val_tok) + "'");
      prev_index = index;
      raw.rows.push_entry(static_cast<std::uint32_t>(index - 1), value);
    }
    raw.rows.finish_row();
    raw.labels.push_back(label);
    raw.max_feature_index = std::max(raw.max_feature_index, prev_index);
  }
  if (raw.labels.empty()) throw DataError("empty LIBSVM input: no data rows");
  return raw;
}

inline RawDataset parse_libsvm(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_libsvm(in);
}

/// Distinct raw labels as (min, max); throws unless exactly two exist.
inline std::pair<double, double> binary_label_pair(std::span<const double> labels) {
  const std::set<double> distinct(labels.begin(), labels.end());
  if (distinct.size() > 2)
    throw DataError("more than two distinct labels (" + std::to_string(distinct.size()) +
                    "); only binary classification is supported");
  if (distinct.size() < 2) throw DataError("fewer than two distinct labels; need a binary problem");
  return {*distinct.begin(), *distinct.rbegin()};
}

/// Scale each row to unit norm, append the bias column at index
/// `raw_features`, map max label -> +1 and min label -> -1.
///
/// `raw_features` defaults to the largest index seen; pass a larger value
/// when a companion file (e.g. the official test set) spans more columns.
/// `label_pair` lets a test file reuse the training file's label mapping.
inline SparseDataset preprocess(const RawDataset& raw, std::size_t raw_features = 0,
                                std::optional<std::pair<double, double>> label_pair = std::nullopt) {
  raw_features = std::max(raw_features, raw.max_feature_index);
  const auto [lo, hi] = label_pair ? *label_pair : binary_label_pair(raw.labels);

  SparseDataset out;
  out.d = raw_features + 1;
  out.labels.reserve(raw.n());
  out.rows.col_indices.reserve(raw.rows.col_indices.size() + raw.n());
  out.rows.values.reserve(raw.rows.values.size() + raw.n());
  for (std::size_t i = 0; i < raw.n(); ++i) {
    const auto r = raw.rows.row(i);
    const double norm = std::sqrt(r.squared_norm());
    for (std::size_t k = 0; k < r.nnz(); ++k) {
      // Explicit zeros carry no information and would break the
      // "nonzero" accounting; drop them.
      if (r.values[k] == 0.0) continue;
      out.rows.push_entry(r.indices[k], r.values[k] / norm);
    }
    out.rows.push_entry(static_cast<std::uint32_t>(raw_features), 1.0);
    out.rows.finish_row();

    const double y = raw.labels[i];
    if (y == hi) {
      out.labels.push_back(1.0);
    } else if (y == lo) {
      out.labels.push_back(-1.0);
    } else {
      throw DataError("label " + std::to_string(y) + " at row " + std::to_string(i) +
                      " is outside the training label pair");
    }
  }
  return out;
}

/// Number of training rows for a fractional split, clamped to [1, n-1].
inline std::size_t split_train_count(std::size_t n, double fraction) {
  auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

/// Seeded Fisher-Yates permutation; the first `split_train_count` rows train.
inline DatasetSplit split(const SparseDataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw DataError("split fraction must lie in (0, 1)");
  if (data.n() < 2) throw DataError("split needs at least two rows");

  std::vector<std::size_t> order(data.n());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }

  const auto n_train = split_train_count(data.n(), fraction);
  DatasetSplit out;
  out.split_seed = seed;
  out.fraction = fraction;
  out.train_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  out.train = data.subset(out.train_rows);
  out.test = data.subset(out.test_rows);
  return out;
}

/// Write rows back as LIBSVM text (1-based indices, 17 significant digits).
inline void write_libsvm(std::ostream& out, const CsrRows& rows, std::span<const double> labels) {
  char buf[64];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", labels[i]);
    out << buf;
    const auto r = rows.row(i);
    for (std::size_t k = 0; k < r.nnz(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", r.values[k]);
      out << ' ' << (r.indices[k] + 1) << ':' << buf;
    }
    out << '\n';
  }
}

inline void write_libsvm(std::ostream& out, const RawDataset& raw) { write_libsvm(out, raw.rows, raw.labels); }
inline void write_libsvm(std::ostream& out, const SparseDataset& data) { write_libsvm(out, data.rows, data.labels); }

}  // namespace aisarah
