#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shtauc/errors.hpp"
#include "shtauc/rng.hpp"
#include "shtauc/vector_ops.hpp"

namespace shtauc {

/// Dense sample matrix with +/-1 labels. Immutable after construction;
/// safe for concurrent reads.
class Dataset {
 public:
  /// features is row-major n x d; labels hold +1/-1.
  Dataset(std::size_t n, std::size_t d, std::vector<double> features,
          std::vector<std::int8_t> labels)
      : n_(n), d_(d), features_(std::move(features)), labels_(std::move(labels)) {
    if (features_.size() != n_ * d_) {
      throw dimension_error("feature buffer size " +
                            std::to_string(features_.size()) +
                            " != n*d = " + std::to_string(n_ * d_));
    }
    if (labels_.size() != n_) {
      throw dimension_error("label count does not match sample count");
    }
    if (!all_finite(features_)) {
      throw argument_error("dataset contains non-finite feature values");
    }
    for (std::size_t i = 0; i < n_; ++i) {
      if (labels_[i] == 1) {
        ++n_pos_;
      } else if (labels_[i] == -1) {
        ++n_neg_;
      } else {
        throw argument_error("label at row " + std::to_string(i) +
                             " is not +1/-1");
      }
    }
  }

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  std::size_t n_pos() const { return n_pos_; }
  std::size_t n_neg() const { return n_neg_; }

  /// Imbalance ratio r = n_pos / n.
  double imbalance_ratio() const {
    return static_cast<double>(n_pos_) / static_cast<double>(n_);
  }

  int label(std::size_t i) const { return labels_[i]; }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * d_, d_};
  }

  const std::vector<double>& features() const { return features_; }
  const std::vector<std::int8_t>& labels() const { return labels_; }

  /// Both classes present? Required by every training/evaluation entry point.
  void require_both_classes() const {
    if (n_pos_ == 0 || n_neg_ == 0) {
      throw degenerate_data_error(
          "dataset needs at least one sample of each class (n_pos=" +
          std::to_string(n_pos_) + ", n_neg=" + std::to_string(n_neg_) + ")");
    }
  }

  /// New dataset holding the given rows, in order.
  Dataset subset(const std::vector<std::size_t>& rows) const {
    std::vector<double> feat;
    feat.reserve(rows.size() * d_);
    std::vector<std::int8_t> lab;
    lab.reserve(rows.size());
    for (std::size_t i : rows) {
      if (i >= n_) throw dimension_error("subset row index out of range");
      auto r = row(i);
      feat.insert(feat.end(), r.begin(), r.end());
      lab.push_back(labels_[i]);
    }
    return Dataset(rows.size(), d_, std::move(feat), std::move(lab));
  }

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> features_;
  std::vector<std::int8_t> labels_;
  std::size_t n_pos_ = 0;
  std::size_t n_neg_ = 0;
};

/// Per-class feature means, computed once per training run.
struct ClassMeans {
  Vector mean_pos;
  Vector mean_neg;
};

/// Exact per-class means of the dataset rows.
inline ClassMeans class_means(const Dataset& data) {
  data.require_both_classes();
  ClassMeans means;
  means.mean_pos.assign(data.d(), 0.0);
  means.mean_neg.assign(data.d(), 0.0);
  for (std::size_t i = 0; i < data.n(); ++i) {
    auto x = data.row(i);
    Vector& target = data.label(i) == 1 ? means.mean_pos : means.mean_neg;
    for (std::size_t j = 0; j < data.d(); ++j) target[j] += x[j];
  }
  for (std::size_t j = 0; j < data.d(); ++j) {
    means.mean_pos[j] /= static_cast<double>(data.n_pos());
    means.mean_neg[j] /= static_cast<double>(data.n_neg());
  }
  return means;
}

/// Disjoint index blocks covering [0, n). All blocks have size b except
/// possibly the last (ragged data still runs; equal sizes are what the
/// exact block-consistency identities assume).
struct BlockPartition {
  std::vector<std::vector<std::size_t>> blocks;
  std::size_t block_size = 0;

  std::size_t count() const { return blocks.size(); }
};

/// Shuffles [0, n) once with the given generator and cuts the result into
/// ceil(n/b) contiguous blocks. The partition stays fixed for a whole run.
inline BlockPartition make_blocks(std::size_t n, std::size_t b, Rng& rng) {
  if (b < 1 || b > n) {
    throw argument_error("block size b=" + std::to_string(b) +
                         " outside [1, n=" + std::to_string(n) + "]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);

  BlockPartition part;
  part.block_size = b;
  for (std::size_t start = 0; start < n; start += b) {
    const std::size_t stop = std::min(start + b, n);
    part.blocks.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return part;
}

}  // namespace shtauc
