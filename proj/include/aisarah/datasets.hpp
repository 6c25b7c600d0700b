#pragma once

// Registry of the benchmark datasets (file names, published sizes, budgets)
// and loading of train/test pairs from a local directory.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aisarah/sparse_dataset.hpp"

namespace aisarah {

inline constexpr std::string_view libsvm_binary_url = "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/";

/// Default 75/25 split seed for datasets without an official test file.
inline constexpr std::uint64_t default_split_seed = 20210503;

struct DatasetInfo {
  std::string_view name;
  std::string_view train_remote;  // file name under the repository URL
  std::string_view test_remote;   // empty: no official test file
  std::size_t raw_features;
  std::size_t train_rows;  // after the split for datasets without a test file
  std::size_t test_rows;
  double budget_reg;    // default effective passes, lambda = 1/n
  double budget_noreg;  // lambda = 0

  bool official_split() const noexcept { return !test_remote.empty(); }
};

inline constexpr std::array<DatasetInfo, 10> dataset_registry = {{
    {"ijcnn1", "ijcnn1.bz2", "ijcnn1.t.bz2", 22, 49990, 91701, 20, 20},
    {"rcv1", "rcv1_train.binary.bz2", "rcv1_test.binary.bz2", 47236, 20242, 677399, 30, 40},
    {"news20", "news20.binary.bz2", "", 1355191, 14997, 4999, 40, 50},
    {"covtype", "covtype.libsvm.binary.bz2", "", 54, 435759, 145253, 20, 20},
    {"real-sim", "real-sim.bz2", "", 20958, 54231, 18078, 20, 30},
    {"a1a", "a1a", "a1a.t", 123, 1605, 30956, 30, 40},
    {"gisette", "gisette_scale.bz2", "gisette_scale.t.bz2", 5000, 6000, 1000, 30, 40},
    {"w1a", "w1a", "w1a.t", 300, 2477, 47272, 40, 50},
    {"w8a", "w8a", "w8a.t", 300, 49749, 14951, 30, 40},
    {"mushrooms", "mushrooms", "", 112, 6093, 2031, 30, 40},
}};

inline const DatasetInfo* find_dataset(std::string_view name) noexcept {
  for (const auto& d : dataset_registry)
    if (d.name == name) return &d;
  return nullptr;
}

inline std::string dataset_names() {
  std::string out;
  for (const auto& d : dataset_registry) {
    if (!out.empty()) out += ", ";
    out += d.name;
  }
  return out;
}

/// Local name of a downloaded file: the remote name without ".bz2".
inline std::string local_name(std::string_view remote) {
  constexpr std::string_view ext = ".bz2";
  if (remote.size() > ext.size() && remote.substr(remote.size() - ext.size()) == ext)
    remote.remove_suffix(ext.size());
  return std::string(remote);
}

inline RawDataset read_libsvm_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return parse_libsvm(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

struct LoadedData {
  std::string name;
  SparseDataset train;
  std::optional<SparseDataset> test;
  /// Raw feature count before the bias column.
  std::size_t raw_features = 0;
  /// Rows and max index of the training file as parsed.
  std::size_t parsed_rows = 0;
  std::size_t parsed_max_index = 0;
};

/// Preprocess an official train/test pair with a shared dimension and label mapping.
inline LoadedData load_pair(std::string name, const RawDataset& train, const RawDataset* test,
                            std::size_t declared_features = 0) {
  LoadedData out;
  out.name = std::move(name);
  out.parsed_rows = train.n();
  out.parsed_max_index = train.max_feature_index;
  out.raw_features = std::max(declared_features, train.max_feature_index);
  if (test) out.raw_features = std::max(out.raw_features, test->max_feature_index);
  const auto labels = binary_label_pair(train.labels);
  out.train = preprocess(train, out.raw_features, labels);
  if (test) out.test = preprocess(*test, out.raw_features, labels);
  return out;
}

/// Load a registry dataset whose files already sit in `dir`.
inline LoadedData load_registered(const DatasetInfo& info, const std::filesystem::path& dir,
                                  std::uint64_t split_seed = default_split_seed) {
  const auto train_raw = read_libsvm_file(dir / local_name(info.train_remote));
  if (info.official_split()) {
    const auto test_raw = read_libsvm_file(dir / local_name(info.test_remote));
    return load_pair(std::string(info.name), train_raw, &test_raw, info.raw_features);
  }
  LoadedData whole = load_pair(std::string(info.name), train_raw, nullptr, info.raw_features);
  auto parts = split(whole.train, 0.75, split_seed);
  whole.train = std::move(parts.train);
  whole.test = std::move(parts.test);
  return whole;
}

}  // namespace aisarah
