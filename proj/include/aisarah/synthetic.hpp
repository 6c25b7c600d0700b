#pragma once

// Small generated binary problems for tests and offline demos. Both
// generators go through the same preprocessing as file data (unit rows,
// appended bias column), so a request for `features` raw columns yields
// a dataset of dimension features + 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "aisarah/rng.hpp"
#include "aisarah/sparse_dataset.hpp"

namespace aisarah {

struct SyntheticOptions {
  std::size_t n = 100;
  std::size_t features = 5;
  std::uint64_t seed = 0;
  /// Probability that a hyperplane label is flipped.
  double label_noise = 0.0;
};

namespace detail {

inline void ensure_two_labels(RawDataset& raw) {
  bool pos = false;
  bool neg = false;
  for (const double y : raw.labels) (y > 0 ? pos : neg) = true;
  if (!(pos && neg)) raw.labels.back() = -raw.labels.back();
}

inline double hyperplane_label(double score, double noise, Rng& rng) {
  double y = score >= 0.0 ? 1.0 : -1.0;
  if (noise > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < noise) y = -y;
  return y;
}

}  // namespace detail

/// Dense Gaussian features; labels are the sign of a random hyperplane.
inline SparseDataset make_gaussian_dataset(const SyntheticOptions& opt) {
  if (opt.n < 2 || opt.features == 0) throw std::invalid_argument("synthetic data needs n >= 2 and features >= 1");
  Rng rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> theta(opt.features);
  for (auto& t : theta) t = normal(rng);

  RawDataset raw;
  raw.max_feature_index = opt.features;
  std::vector<double> x(opt.features);
  for (std::size_t i = 0; i < opt.n; ++i) {
    double score = 0.0;
    for (std::size_t j = 0; j < opt.features; ++j) {
      x[j] = normal(rng);
      score += x[j] * theta[j];
      raw.rows.push_entry(static_cast<std::uint32_t>(j), x[j]);
    }
    raw.rows.finish_row();
    raw.labels.push_back(detail::hyperplane_label(score, opt.label_noise, rng));
  }
  detail::ensure_two_labels(raw);
  return preprocess(raw, opt.features, std::pair{-1.0, 1.0});
}

/// Sparse 0/1 features with roughly `active` ones per row, in the style of
/// one-hot encoded census data.
inline SparseDataset make_sparse_binary_dataset(const SyntheticOptions& opt, std::size_t active = 14) {
  if (opt.n < 2 || opt.features == 0) throw std::invalid_argument("synthetic data needs n >= 2 and features >= 1");
  active = std::min(active, opt.features);
  Rng rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> theta(opt.features);
  for (auto& t : theta) t = normal(rng);
  const double offset = normal(rng);

  RawDataset raw;
  raw.max_feature_index = opt.features;
  std::vector<std::size_t> cols(opt.features);
  for (std::size_t j = 0; j < opt.features; ++j) cols[j] = j;
  for (std::size_t i = 0; i < opt.n; ++i) {
    for (std::size_t k = 0; k < active; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, opt.features - 1);
      std::swap(cols[k], cols[pick(rng)]);
    }
    std::vector<std::size_t> chosen(cols.begin(), cols.begin() + static_cast<std::ptrdiff_t>(active));
    std::sort(chosen.begin(), chosen.end());
    double score = offset;
    for (const auto j : chosen) {
      score += theta[j];
      raw.rows.push_entry(static_cast<std::uint32_t>(j), 1.0);
    }
    raw.rows.finish_row();
    raw.labels.push_back(detail::hyperplane_label(score / std::sqrt(static_cast<double>(active)), opt.label_noise, rng));
  }
  detail::ensure_two_labels(raw);
  return preprocess(raw, opt.features, std::pair{-1.0, 1.0});
}

}  // namespace aisarah
