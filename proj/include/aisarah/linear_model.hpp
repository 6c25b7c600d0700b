#pragma once

// Regularized finite-sum objective over a SparseDataset:
//   P(w) = (1/n) sum_i phi(x_i^T w; y_i) + (lambda/2) |w|^2
// with derivative and curvature queries used by the optimizers and theory.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <ranges>
#include <span>
#include <stdexcept>
#include <vector>

#include "aisarah/losses.hpp"
#include "aisarah/power_iteration.hpp"
#include "aisarah/sparse_dataset.hpp"
#include "aisarah/vector_ops.hpp"

namespace aisarah {

/// First and second derivative of xi(alpha) = |grad f_S(w - alpha v) - grad f_S(w) + v|^2 at alpha = 0.
struct CurvatureProbe {
  double xi_prime0 = 0.0;
  double xi_double_prime0 = 0.0;
  std::vector<std::size_t> batch;
};

/// Margin view of one sample: z = y x^T w, curvature s and ds/dz at z.
struct MarginTerms {
  double z = 0.0;
  double s = 0.0;
  double s_prime = 0.0;
};

template <class Loss>
class LinearModel {
 public:
  using loss_type = Loss;

  /// The dataset must outlive the model.
  LinearModel(const SparseDataset& data, double lambda) : data_(&data), lambda_(lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  }

  const SparseDataset& data() const noexcept { return *data_; }
  std::size_t n() const noexcept { return data_->n(); }
  std::size_t d() const noexcept { return data_->d; }
  double lambda() const noexcept { return lambda_; }
  /// Strong-convexity estimate; the regularizer is the only guaranteed source.
  double mu() const noexcept { return lambda_; }

  double prediction(std::span<const double> w, std::size_t i) const noexcept { return data_->row(i).dot(w); }

  MarginTerms margin_terms(std::span<const double> w, std::size_t i) const noexcept {
    const double y = data_->labels[i];
    const double t = prediction(w, i);
    return {y * t, Loss::d2(t, y), y * Loss::d3(t, y)};
  }

  double loss(std::span<const double> w) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < n(); ++i) acc += Loss::value(prediction(w, i), data_->labels[i]);
    return acc / static_cast<double>(n()) + 0.5 * lambda_ * squared_norm(w);
  }

  double batch_loss(std::span<const double> w, std::span<const std::size_t> batch) const {
    require_batch(batch);
    double acc = 0.0;
    for (const auto i : batch) acc += Loss::value(prediction(w, i), data_->labels[i]);
    return acc / static_cast<double>(batch.size()) + 0.5 * lambda_ * squared_norm(w);
  }

  Vector full_gradient(std::span<const double> w) const {
    Vector g(d());
    accumulate_gradient(w, std::views::iota(std::size_t{0}, n()), n(), g);
    return g;
  }

  Vector minibatch_gradient(std::span<const double> w, std::span<const std::size_t> batch) const {
    require_batch(batch);
    Vector g(d());
    accumulate_gradient(w, batch, batch.size(), g);
    return g;
  }

  /// out = grad f_S(w_new) - grad f_S(w_old), one pass over the batch rows.
  void gradient_difference(std::span<const double> w_new, std::span<const double> w_old,
                           std::span<const std::size_t> batch, std::span<double> out) const {
    require_batch(batch);
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto i : batch) {
      const auto r = data_->row(i);
      const double y = data_->labels[i];
      r.axpy(Loss::d1(r.dot(w_new), y) - Loss::d1(r.dot(w_old), y), out);
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = out[j] * inv_b + lambda_ * (w_new[j] - w_old[j]);
  }

  /// H_S(w) v
  Vector hessian_vector(std::span<const double> w, std::span<const double> v,
                        std::span<const std::size_t> batch) const {
    require_batch(batch);
    Vector hv(d());
    for (const auto i : batch) {
      const auto r = data_->row(i);
      r.axpy(Loss::d2(r.dot(w), data_->labels[i]) * r.dot(v), hv);
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (std::size_t j = 0; j < hv.size(); ++j) hv[j] = hv[j] * inv_b + lambda_ * v[j];
    return hv;
  }

  /// xi'(0) = -2 v^T H_S v and xi''(0) = 2 |H_S v|^2 + 2 (1/b) sum_i phi'''_i (x_i^T v)^3.
  CurvatureProbe xi_derivatives(std::span<const double> w, std::span<const double> v,
                                std::span<const std::size_t> batch) const {
    require_batch(batch);
    Vector hv(d());
    double quad = 0.0;
    double cubic = 0.0;
    for (const auto i : batch) {
      const auto r = data_->row(i);
      const double y = data_->labels[i];
      const double t = r.dot(w);
      const double a = r.dot(v);
      const double c2 = Loss::d2(t, y);
      r.axpy(c2 * a, hv);
      quad += c2 * a * a;
      cubic += Loss::d3(t, y) * a * a * a;
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (std::size_t j = 0; j < hv.size(); ++j) hv[j] = hv[j] * inv_b + lambda_ * v[j];

    CurvatureProbe probe;
    probe.xi_prime0 = -2.0 * (quad * inv_b + lambda_ * squared_norm(v));
    probe.xi_double_prime0 = 2.0 * squared_norm(hv) + 2.0 * cubic * inv_b;
    probe.batch.assign(batch.begin(), batch.end());
    return probe;
  }

  /// |Hessian of f_i at w| = phi''(x_i^T w) |x_i|^2 + lambda (rank one plus identity).
  double pointwise_smoothness(std::span<const double> w, std::size_t i) const noexcept {
    const auto r = data_->row(i);
    return Loss::d2(r.dot(w), data_->labels[i]) * r.squared_norm() + lambda_;
  }

  /// sup_w |Hessian of f_i|.
  double sample_smoothness_bound(std::size_t i) const noexcept {
    return Loss::curvature_sup() * data_->row(i).squared_norm() + lambda_;
  }

  /// max_i sup_w |Hessian of f_i|; the global constant of every component.
  double max_sample_smoothness() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < n(); ++i) m = std::max(m, sample_smoothness_bound(i));
    return m;
  }

 private:
  static void require_batch(std::span<const std::size_t> batch) {
    if (batch.empty()) throw std::invalid_argument("mini-batch must be non-empty");
  }

  template <class Indices>
  void accumulate_gradient(std::span<const double> w, Indices&& indices, std::size_t count,
                           std::span<double> out) const {
    for (const std::size_t i : indices) {
      const auto r = data_->row(i);
      r.axpy(Loss::d1(r.dot(w), data_->labels[i]), out);
    }
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = out[j] * inv + lambda_ * w[j];
  }

  const SparseDataset* data_;
  double lambda_;
};

using LogisticModel = LinearModel<LogisticLoss>;

/// lambda_max((1/n) sum_i x_i x_i^T) by power iteration on u -> (1/n) X^T (X u).
/// With `include_bias = false` the last column (bias) is ignored.
inline PowerIterationResult gram_lambda_max(const SparseDataset& data, bool include_bias = true,
                                            double rel_tol = 1e-12, std::size_t max_iterations = 10000) {
  const std::size_t dim = include_bias ? data.d : data.d - 1;
  const double inv_n = 1.0 / static_cast<double>(data.n());
  auto apply = [&](std::span<const double> u, std::span<double> out) {
    for (std::size_t i = 0; i < data.n(); ++i) {
      const auto r = data.row(i);
      double xu = 0.0;
      for (std::size_t k = 0; k < r.nnz(); ++k)
        if (r.indices[k] < dim) xu += r.values[k] * u[r.indices[k]];
      if (xu == 0.0) continue;
      for (std::size_t k = 0; k < r.nnz(); ++k)
        if (r.indices[k] < dim) out[r.indices[k]] += inv_n * xu * r.values[k];
    }
  };
  return power_iteration(dim, apply, rel_tol, max_iterations);
}

/// L = sup(phi'') * lambda_max((1/n) sum_i x_i x_i^T) + lambda; the smoothness constant of P.
template <class Loss>
double global_lipschitz(const LinearModel<Loss>& model, bool include_bias = true) {
  return Loss::curvature_sup() * gram_lambda_max(model.data(), include_bias).eigenvalue + model.lambda();
}

/// Fraction of rows with sign(x_i^T w) == y_i, sign(0) = +1.
inline double accuracy(const SparseDataset& data, std::span<const double> w) {
  if (data.n() == 0) throw DataError("accuracy on an empty dataset");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double predicted = data.row(i).dot(w) >= 0.0 ? 1.0 : -1.0;
    if (predicted == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.n());
}

}  // namespace aisarah
