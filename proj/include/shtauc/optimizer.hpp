#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "shtauc/dataset.hpp"
#include "shtauc/errors.hpp"
#include "shtauc/metrics.hpp"
#include "shtauc/objective.hpp"
#include "shtauc/rng.hpp"
#include "shtauc/vector_ops.hpp"

namespace shtauc {

struct OptimizerConfig {
  std::size_t sparsity_k = 1;   // relaxed sparsity level k
  double step_size = 0.01;      // gamma
  std::size_t block_size = 1;   // b
  std::size_t iterations = 0;   // T
  std::uint64_t seed = 0;
  std::size_t eval_every = 0;   // 0 = once per epoch (every m iterations)

  void validate(std::size_t n, std::size_t d) const {
    if (sparsity_k < 1 || sparsity_k > d) {
      throw argument_error("sparsity_k must lie in [1, d]");
    }
    if (block_size < 1 || block_size > n) {
      throw argument_error("block_size must lie in [1, n]");
    }
    if (!(step_size > 0.0) || !std::isfinite(step_size)) {
      throw argument_error("step_size must be positive and finite");
    }
  }
};

struct TraceRecord {
  std::size_t iteration = 0;
  double epoch = 0.0;
  double objective = 0.0;
  // NaN when no test set / no reference model was supplied.
  double test_auc = std::numeric_limits<double>::quiet_NaN();
  std::size_t sparsity = 0;
  double dist_to_truth = std::numeric_limits<double>::quiet_NaN();
};

struct TrainTrace {
  std::vector<TraceRecord> records;
  /// How often each block index was drawn; diagnostic for the sampling law.
  std::vector<std::size_t> block_draw_counts;

  const TraceRecord& final_record() const { return records.back(); }

  /// Record with the highest test AUC (final record if AUC was not traced).
  const TraceRecord& best_auc_record() const {
    const TraceRecord* best = &records.back();
    for (const auto& rec : records) {
      if (std::isnan(rec.test_auc)) continue;
      if (std::isnan(best->test_auc) || rec.test_auc > best->test_auc) {
        best = &rec;
      }
    }
    return *best;
  }
};

/// Optional per-record evaluation inputs. Pointers must outlive the run.
struct EvalHooks {
  const Dataset* test_set = nullptr;
  const Vector* reference_model = nullptr;  // for ||w_t - w*||_2
};

struct TrainResult {
  Vector model;
  TrainTrace trace;
};

namespace detail {

inline double score_auc(const Dataset& test, const Vector& w) {
  Vector scores(test.n());
  for (std::size_t i = 0; i < test.n(); ++i) {
    scores[i] = dot_row(test.row(i), w);
  }
  return auc_score(scores, test.labels());
}

/// Shared stochastic hard-thresholding skeleton. The RNG discipline is part
/// of the contract: a single generator seeded with config.seed first builds
/// the block partition (one shuffle of [0,n)), then draws one uniform block
/// index per iteration. Given (data, config, w0) the run is fully
/// deterministic.
template <typename GradientFn, typename ObjectiveFn>
TrainResult hard_threshold_loop(const Dataset& data,
                                const OptimizerConfig& config, Vector w,
                                const EvalHooks& hooks, GradientFn&& gradient,
                                ObjectiveFn&& objective) {
  config.validate(data.n(), data.d());
  if (w.size() != data.d()) {
    throw dimension_error("w0 dimension does not match data");
  }
  if (!all_finite(w)) throw argument_error("w0 has non-finite entries");
  if (l0_norm(w) > config.sparsity_k) {
    throw argument_error("||w0||_0 exceeds the sparsity budget k");
  }

  Rng rng(config.seed);
  const BlockPartition partition = make_blocks(data.n(), config.block_size, rng);
  const std::size_t m = partition.count();
  const std::size_t eval_every =
      config.eval_every > 0 ? config.eval_every : m;

  TrainResult result;
  result.trace.block_draw_counts.assign(m, 0);

  auto record = [&](std::size_t iteration) {
    TraceRecord rec;
    rec.iteration = iteration;
    rec.epoch = static_cast<double>(iteration) / static_cast<double>(m);
    rec.objective = objective(w);
    if (!std::isfinite(rec.objective) || std::abs(rec.objective) > 1e12) {
      throw divergence_error(iteration,
                             "objective " + std::to_string(rec.objective) +
                                 " exceeds the divergence guard");
    }
    rec.sparsity = l0_norm(w);
    if (hooks.test_set != nullptr) rec.test_auc = score_auc(*hooks.test_set, w);
    if (hooks.reference_model != nullptr) {
      double acc = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double diff = w[j] - (*hooks.reference_model)[j];
        acc += diff * diff;
      }
      rec.dist_to_truth = std::sqrt(acc);
    }
    result.trace.records.push_back(rec);
  };

  record(0);
  for (std::size_t t = 0; t < config.iterations; ++t) {
    const std::size_t block_index = rng.uniform_index(m);
    ++result.trace.block_draw_counts[block_index];

    const Vector grad = gradient(partition.blocks[block_index], w);
    for (std::size_t j = 0; j < w.size(); ++j) {
      w[j] -= config.step_size * grad[j];
    }
    // Checked before thresholding: a NaN threshold would zero the iterate
    // and mask the blow-up.
    if (!all_finite(w)) {
      throw divergence_error(t + 1, "iterate has non-finite entries");
    }
    w = hard_threshold(w, config.sparsity_k);
    if ((t + 1) % eval_every == 0 || t + 1 == config.iterations) {
      record(t + 1);
    }
  }

  result.model = std::move(w);
  return result;
}

}  // namespace detail

/// SHT-AUC (stochastic hard thresholding on the single-sum AUC objective):
/// class means are computed once up front; each iteration draws a block
/// uniformly, takes a gradient step on the block objective and hard
/// thresholds back to the sparsity budget. Per-iteration cost O(bd + d).
inline TrainResult sht_auc_train(const Dataset& data,
                                 const OptimizerConfig& config,
                                 const Vector& w0,
                                 const EvalHooks& hooks = {}) {
  data.require_both_classes();
  const ClassMeans means = class_means(data);
  return detail::hard_threshold_loop(
      data, config, w0, hooks,
      [&](const std::vector<std::size_t>& block, const Vector& w) {
        return block_gradient(data, means, block, w);
      },
      [&](const Vector& w) { return erm_objective(data, means, w); });
}

/// Zero start; satisfies the sparsity precondition for any k and makes
/// F(w0) = 1 a checkable anchor.
inline TrainResult sht_auc_train(const Dataset& data,
                                 const OptimizerConfig& config,
                                 const EvalHooks& hooks = {}) {
  return sht_auc_train(data, config, Vector(data.d(), 0.0), hooks);
}

/// Mean logistic loss (1/n) sum log(1 + exp(-y w'x)), evaluated stably.
inline double logistic_objective(const Dataset& data, const Vector& w) {
  detail::check_model_dim(data, w);
  double acc = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double z =
        static_cast<double>(data.label(i)) * detail::dot_row(data.row(i), w);
    acc += z >= 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
  }
  return acc / static_cast<double>(data.n());
}

/// Minibatch gradient of the mean logistic loss:
/// (1/|B|) sum_{j in B} -y_j sigma(-y_j w'x_j) x_j.
inline Vector logistic_block_gradient(const Dataset& data,
                                      const std::vector<std::size_t>& block,
                                      const Vector& w) {
  detail::check_model_dim(data, w);
  if (block.empty()) throw argument_error("gradient over an empty block");
  Vector grad(data.d(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(block.size());
  for (std::size_t idx : block) {
    auto x = data.row(idx);
    const double y = static_cast<double>(data.label(idx));
    const double z = y * detail::dot_row(x, w);
    const double coeff = -y / (1.0 + std::exp(z)) * inv_b;
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += coeff * x[j];
  }
  return grad;
}

/// StoIHT on the pointwise logistic loss: the same loop and trace schema as
/// sht_auc_train with the block gradient swapped out. Serves as the
/// ERM-vs-AUC comparison arm.
inline TrainResult stoiht_logistic_train(const Dataset& data,
                                         const OptimizerConfig& config,
                                         const Vector& w0,
                                         const EvalHooks& hooks = {}) {
  data.require_both_classes();
  return detail::hard_threshold_loop(
      data, config, w0, hooks,
      [&](const std::vector<std::size_t>& block, const Vector& w) {
        return logistic_block_gradient(data, block, w);
      },
      [&](const Vector& w) { return logistic_objective(data, w); });
}

inline TrainResult stoiht_logistic_train(const Dataset& data,
                                         const OptimizerConfig& config,
                                         const EvalHooks& hooks = {}) {
  return stoiht_logistic_train(data, config, Vector(data.d(), 0.0), hooks);
}

}  // namespace shtauc
