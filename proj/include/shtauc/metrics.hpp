#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "shtauc/errors.hpp"
#include "shtauc/vector_ops.hpp"

namespace shtauc {

/// Tie handling for the AUC pair count. `half` is the Wilcoxon convention
/// (ties score 1/2, so constant scores give AUC 0.5 and label-flip
/// antisymmetry is exact); `strict` counts only strictly higher positive
/// scores, the literal indicator form.
enum class TieRule { half, strict };

namespace detail {

inline void check_two_classes(const std::vector<std::int8_t>& labels) {
  bool has_pos = false;
  bool has_neg = false;
  for (auto y : labels) {
    has_pos |= (y == 1);
    has_neg |= (y == -1);
  }
  if (!has_pos || !has_neg) {
    throw undefined_metric_error("AUC needs at least one sample per class");
  }
}

}  // namespace detail

/// Exhaustive O(n+ n-) pair loop. Kept as the reference the rank-based
/// implementation is checked against.
inline double auc_score_exhaustive(const Vector& scores,
                                   const std::vector<std::int8_t>& labels,
                                   TieRule ties = TieRule::half) {
  detail::check_two_classes(labels);
  double acc = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    ++n_pos;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != -1) continue;
      if (scores[i] > scores[j]) {
        acc += 1.0;
      } else if (scores[i] == scores[j] && ties == TieRule::half) {
        acc += 0.5;
      }
    }
  }
  for (auto y : labels) n_neg += (y == -1);
  return acc / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

/// AUC in O(n log n) via rank statistics. With midranks over tied scores,
///   AUC = (R+ - n+(n+ + 1)/2) / (n+ n-)
/// where R+ is the rank sum of the positives; midranks make ties count 1/2.
/// Under TieRule::strict each tie group instead contributes only the pairs
/// where the positive strictly wins (none within a group).
inline double auc_score(const Vector& scores,
                        const std::vector<std::int8_t>& labels,
                        TieRule ties = TieRule::half) {
  if (scores.size() != labels.size()) {
    throw dimension_error("scores/labels length mismatch");
  }
  detail::check_two_classes(labels);

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  for (auto y : labels) {
    n_pos += (y == 1);
    n_neg += (y == -1);
  }

  double pair_wins = 0.0;  // pairs (pos, neg) won, ties per rule
  std::size_t negs_below = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    // Walk one tie group [i, j).
    std::size_t j = i;
    std::size_t group_pos = 0;
    std::size_t group_neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      group_pos += (labels[order[j]] == 1);
      group_neg += (labels[order[j]] == -1);
      ++j;
    }
    pair_wins += static_cast<double>(group_pos) *
                 static_cast<double>(negs_below);
    if (ties == TieRule::half) {
      pair_wins += 0.5 * static_cast<double>(group_pos) *
                   static_cast<double>(group_neg);
    }
    negs_below += group_neg;
    i = j;
  }
  return pair_wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

/// Overlap |truth and supp(w)| after truncating |w_i| <= truncate_eps to 0.
inline std::size_t support_overlap(const Vector& w, const SupportSet& truth,
                                   double truncate_eps) {
  std::size_t overlap = 0;
  for (std::size_t i : truth.indices) {
    if (i < w.size() && std::abs(w[i]) > truncate_eps) ++overlap;
  }
  return overlap;
}

/// F1 of recovered vs true support. Precision divides by ||w||_0 (after
/// truncation), recall by |truth|; empty recovered support or empty
/// intersection scores 0.
inline double support_f1(const Vector& w, const SupportSet& truth,
                         double truncate_eps = 0.0) {
  if (truth.size() == 0) throw argument_error("true support is empty");
  const std::size_t recovered = support(w, truncate_eps).size();
  const std::size_t overlap = support_overlap(w, truth, truncate_eps);
  if (recovered == 0 || overlap == 0) return 0.0;
  const double precision =
      static_cast<double>(overlap) / static_cast<double>(recovered);
  const double recall =
      static_cast<double>(overlap) / static_cast<double>(truth.size());
  return 2.0 * precision * recall / (precision + recall);
}

/// Jaccard index |truth and supp(w)| / |truth or supp(w)| under the same
/// truncation.
inline double support_jaccard(const Vector& w, const SupportSet& truth,
                              double truncate_eps = 0.0) {
  if (truth.size() == 0) throw argument_error("true support is empty");
  const std::size_t recovered = support(w, truncate_eps).size();
  const std::size_t overlap = support_overlap(w, truth, truncate_eps);
  const std::size_t united = recovered + truth.size() - overlap;
  return static_cast<double>(overlap) / static_cast<double>(united);
}

/// Recall-style related-feature ratio |truth and supp(w)| / |truth|.
inline double related_ratio(const Vector& w, const SupportSet& truth,
                            double truncate_eps = 0.0) {
  if (truth.size() == 0) throw argument_error("true support is empty");
  return static_cast<double>(support_overlap(w, truth, truncate_eps)) /
         static_cast<double>(truth.size());
}

/// Bundle of the evaluation metrics for one model.
struct EvalReport {
  double auc = 0.0;
  double f1 = 0.0;
  double jaccard = 0.0;
  double ratio = 0.0;
  std::size_t support_size = 0;
};

}  // namespace shtauc
