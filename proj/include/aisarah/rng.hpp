#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace aisarah {

using Rng = std::mt19937_64;

/// i.i.d. N(0,1) * scale, drawn in coordinate order.
inline std::vector<double> gaussian_vector(Rng& rng, std::size_t d, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(d);
  for (auto& x : out) x = scale * normal(rng);
  return out;
}

/// Uniform b-subset of [0, n) without replacement, returned sorted
/// ascending so batch sums follow index order.
///
/// Keeps a permutation buffer between calls; a partial Fisher-Yates pass over
/// it yields a uniform subset regardless of the buffer's prior state.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch_size) : perm_(n), batch_(batch_size) {
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
  }

  const std::vector<std::size_t>& next(Rng& rng) {
    const auto n = perm_.size();
    for (std::size_t k = 0; k < batch_.size(); ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, n - 1);
      std::swap(perm_[k], perm_[pick(rng)]);
      batch_[k] = perm_[k];
    }
    std::sort(batch_.begin(), batch_.end());
    return batch_;
  }

  std::size_t batch_size() const noexcept { return batch_.size(); }

 private:
  std::vector<std::size_t> perm_;
  std::vector<std::size_t> batch_;
};

}  // namespace aisarah
