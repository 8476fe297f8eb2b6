#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "shtauc/dataset.hpp"
#include "shtauc/errors.hpp"
#include "shtauc/vector_ops.hpp"

namespace shtauc {

namespace detail {

inline double dot_row(std::span<const double> x, const Vector& w) {
  double acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) acc += x[j] * w[j];
  return acc;
}

inline void check_model_dim(const Dataset& data, const Vector& w) {
  if (w.size() != data.d()) {
    throw dimension_error("model dimension " + std::to_string(w.size()) +
                          " != data dimension " + std::to_string(data.d()));
  }
}

}  // namespace detail

/// Pairwise least-squares AUC objective evaluated by the direct double
/// loop over positive-negative pairs:
///   F(w) = (1/(n+ n-)) sum_{y_i=+1} sum_{y_j=-1} (1 - w'(x_i - x_j))^2.
/// O(n+ n- d); this is the brute-force reference the single-sum form is
/// checked against.
inline double pairwise_objective(const Dataset& data, const Vector& w) {
  data.require_both_classes();
  detail::check_model_dim(data, w);

  std::vector<double> margins(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    margins[i] = detail::dot_row(data.row(i), w);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (data.label(i) != 1) continue;
    for (std::size_t j = 0; j < data.n(); ++j) {
      if (data.label(j) != -1) continue;
      const double t = 1.0 - (margins[i] - margins[j]);
      acc += t * t;
    }
  }
  return acc / (static_cast<double>(data.n_pos()) *
                static_cast<double>(data.n_neg()));
}

/// Per-sample loss of the single-sum reformulation:
///   f(w; x, y) = (1/r)     (w'(x - mean_pos))^2   if y = +1
///              + (1/(1-r)) (w'(x - mean_neg))^2   if y = -1
///              + 1 + 2 w'delta + (w'delta)^2,  delta = mean_neg - mean_pos.
/// The constant block is part of every sample's loss. r is the global
/// training-set imbalance ratio.
inline double sample_loss(std::span<const double> x, int y, const ClassMeans& means,
                          double r, const Vector& w) {
  const Vector& mean = y == 1 ? means.mean_pos : means.mean_neg;
  double dev = 0.0;
  double delta_margin = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    dev += w[j] * (x[j] - mean[j]);
    delta_margin += w[j] * (means.mean_neg[j] - means.mean_pos[j]);
  }
  const double class_coeff = y == 1 ? 1.0 / r : 1.0 / (1.0 - r);
  return class_coeff * dev * dev + 1.0 + 2.0 * delta_margin +
         delta_margin * delta_margin;
}

/// Single-sum (ERM) form of the pairwise objective: F(w) = (1/n) sum_i f(w; z_i).
/// Equals pairwise_objective up to floating-point summation; O(nd).
inline double erm_objective(const Dataset& data, const ClassMeans& means,
                            const Vector& w) {
  data.require_both_classes();
  detail::check_model_dim(data, w);
  const double r = data.imbalance_ratio();

  // Hoist the terms shared by every sample.
  double delta_margin = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    delta_margin += w[j] * (means.mean_neg[j] - means.mean_pos[j]);
  }
  const double shared =
      1.0 + 2.0 * delta_margin + delta_margin * delta_margin;

  double acc = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    auto x = data.row(i);
    const Vector& mean = data.label(i) == 1 ? means.mean_pos : means.mean_neg;
    double dev = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) dev += w[j] * (x[j] - mean[j]);
    const double coeff = data.label(i) == 1 ? 1.0 / r : 1.0 / (1.0 - r);
    acc += coeff * dev * dev;
  }
  return acc / static_cast<double>(data.n()) + shared;
}

/// Gradient of the block objective f_B(w) = (1/|B|) sum_{j in B} f(w; z_j):
///   grad f(w; z) = (2/r) (w'(x - mean_pos)) (x - mean_pos)        for y = +1
///                  (2/(1-r)) (w'(x - mean_neg)) (x - mean_neg)    for y = -1
///   plus, for every sample, 2 delta + 2 (w'delta) delta.
inline Vector block_gradient(const Dataset& data, const ClassMeans& means,
                             const std::vector<std::size_t>& block,
                             const Vector& w) {
  detail::check_model_dim(data, w);
  if (block.empty()) throw argument_error("block gradient over an empty block");
  const double r = data.imbalance_ratio();
  const std::size_t d = data.d();

  double delta_margin = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    delta_margin += w[j] * (means.mean_neg[j] - means.mean_pos[j]);
  }

  Vector grad(d, 0.0);
  const double inv_b = 1.0 / static_cast<double>(block.size());
  for (std::size_t idx : block) {
    if (idx >= data.n()) throw dimension_error("block index out of range");
    auto x = data.row(idx);
    const Vector& mean =
        data.label(idx) == 1 ? means.mean_pos : means.mean_neg;
    double dev = 0.0;
    for (std::size_t j = 0; j < d; ++j) dev += w[j] * (x[j] - mean[j]);
    const double coeff =
        (data.label(idx) == 1 ? 2.0 / r : 2.0 / (1.0 - r)) * dev * inv_b;
    for (std::size_t j = 0; j < d; ++j) grad[j] += coeff * (x[j] - mean[j]);
  }
  // Shared term averages to itself regardless of block composition.
  const double shared_coeff = 2.0 + 2.0 * delta_margin;
  for (std::size_t j = 0; j < d; ++j) {
    grad[j] += shared_coeff * (means.mean_neg[j] - means.mean_pos[j]);
  }
  return grad;
}

/// Full-data gradient of F.
inline Vector full_gradient(const Dataset& data, const ClassMeans& means,
                            const Vector& w) {
  std::vector<std::size_t> all(data.n());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return block_gradient(data, means, all, w);
}

/// Exact quadratic form v' (hessian of F) v:
///   (2/n+) sum_{y=+1} (v'(x - mean_pos))^2
/// + (2/n-) sum_{y=-1} (v'(x - mean_neg))^2
/// + 2 (v'delta)^2.
/// F is exactly quadratic, so
///   F(w + t v) = F(w) + t <grad F(w), v> + (t^2/2) * this value.
inline double hessian_quadratic_form(const Dataset& data,
                                     const ClassMeans& means, const Vector& v) {
  data.require_both_classes();
  detail::check_model_dim(data, v);

  double pos_acc = 0.0;
  double neg_acc = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    auto x = data.row(i);
    const Vector& mean = data.label(i) == 1 ? means.mean_pos : means.mean_neg;
    double dev = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) dev += v[j] * (x[j] - mean[j]);
    (data.label(i) == 1 ? pos_acc : neg_acc) += dev * dev;
  }
  double delta_margin = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    delta_margin += v[j] * (means.mean_neg[j] - means.mean_pos[j]);
  }
  return 2.0 * pos_acc / static_cast<double>(data.n_pos()) +
         2.0 * neg_acc / static_cast<double>(data.n_neg()) +
         2.0 * delta_margin * delta_margin;
}

/// Quadratic form of a single block objective's hessian, v' (hessian f_B) v.
/// max over blocks of this witnesses the restricted smoothness magnitude.
inline double block_hessian_quadratic_form(const Dataset& data,
                                           const ClassMeans& means,
                                           const std::vector<std::size_t>& block,
                                           const Vector& v) {
  detail::check_model_dim(data, v);
  if (block.empty()) throw argument_error("hessian form over an empty block");
  const double r = data.imbalance_ratio();

  double acc = 0.0;
  for (std::size_t idx : block) {
    auto x = data.row(idx);
    const Vector& mean =
        data.label(idx) == 1 ? means.mean_pos : means.mean_neg;
    double dev = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) dev += v[j] * (x[j] - mean[j]);
    acc += (data.label(idx) == 1 ? 2.0 / r : 2.0 / (1.0 - r)) * dev * dev;
  }
  double delta_margin = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    delta_margin += v[j] * (means.mean_neg[j] - means.mean_pos[j]);
  }
  return acc / static_cast<double>(block.size()) +
         2.0 * delta_margin * delta_margin;
}

}  // namespace shtauc
