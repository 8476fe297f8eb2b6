#pragma once

#include <cstdint>
#include <vector>

#include "shtauc/dataset.hpp"
#include "shtauc/errors.hpp"
#include "shtauc/rng.hpp"

namespace shtauc {

/// One cross-validation split: row indices for training and testing.
struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified k-fold indices, deterministic in trial_seed. Each class is
/// shuffled separately and dealt round-robin, so per-fold class counts are
/// balanced within one member. Stratification matters here: at r = 0.05 a
/// plain split can produce test folds with no positives, leaving AUC
/// undefined.
inline std::vector<FoldSplit> split_and_shuffle(const Dataset& data,
                                                std::size_t folds,
                                                std::uint64_t trial_seed) {
  if (folds < 2) throw argument_error("need at least 2 folds");
  if (data.n_pos() < folds || data.n_neg() < folds) {
    throw degenerate_data_error(
        "each class needs at least `folds` members for stratified CV");
  }

  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < data.n(); ++i) {
    (data.label(i) == 1 ? pos : neg).push_back(i);
  }
  Rng rng(trial_seed);
  rng.shuffle(pos);
  rng.shuffle(neg);

  std::vector<std::vector<std::size_t>> fold_members(folds);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    fold_members[i % folds].push_back(pos[i]);
  }
  for (std::size_t i = 0; i < neg.size(); ++i) {
    fold_members[i % folds].push_back(neg[i]);
  }

  std::vector<FoldSplit> splits(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    splits[f].test = fold_members[f];
    for (std::size_t g = 0; g < folds; ++g) {
      if (g == f) continue;
      splits[f].train.insert(splits[f].train.end(), fold_members[g].begin(),
                             fold_members[g].end());
    }
  }
  return splits;
}

}  // namespace shtauc
