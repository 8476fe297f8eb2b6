#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "shtauc/dataset.hpp"
#include "shtauc/errors.hpp"
#include "shtauc/rng.hpp"
#include "shtauc/vector_ops.hpp"

namespace shtauc {

/// Imbalanced Gaussian generator spec. Positives carry mean `mu` on a
/// planted support of size k_star; every other entry (and every entry of a
/// negative sample) is standard normal.
struct SyntheticSpec {
  std::size_t n = 1000;
  std::size_t d = 1000;
  std::size_t k_star = 20;
  double r = 0.05;
  double mu = 0.3;
  std::uint64_t seed = 0;

  void validate() const {
    if (n == 0 || d == 0) throw argument_error("synthetic spec needs n, d >= 1");
    if (k_star > d) {
      throw argument_error("planted support k_star=" + std::to_string(k_star) +
                           " exceeds dimension d=" + std::to_string(d));
    }
    if (!(r > 0.0) || r > 0.5) {
      throw argument_error("imbalance ratio must lie in (0, 0.5]");
    }
    if (std::lround(r * static_cast<double>(n)) < 1) {
      throw argument_error("round(r*n) must be >= 1");
    }
  }

  std::size_t positives() const {
    return static_cast<std::size_t>(std::lround(r * static_cast<double>(n)));
  }
};

/// Ground-truth planted support.
struct PlantedTruth {
  SupportSet support;
  double mu = 0.0;

  /// Canonical planted model: mu on the support, zero elsewhere.
  Vector model(std::size_t d) const {
    Vector w(d, 0.0);
    for (std::size_t i : support.indices) w[i] = mu;
    return w;
  }
};

namespace detail {

inline Dataset sample_planted(const SyntheticSpec& spec,
                              const SupportSet& support, Rng& rng) {
  const std::size_t n_pos = spec.positives();
  std::vector<double> features(spec.n * spec.d);
  std::vector<std::int8_t> labels(spec.n);

  std::vector<char> on_support(spec.d, 0);
  for (std::size_t i : support.indices) on_support[i] = 1;

  for (std::size_t i = 0; i < spec.n; ++i) {
    const bool positive = i < n_pos;
    labels[i] = positive ? 1 : -1;
    double* row = features.data() + i * spec.d;
    for (std::size_t j = 0; j < spec.d; ++j) {
      row[j] = rng.normal();
      if (positive && on_support[j]) row[j] += spec.mu;
    }
  }
  return Dataset(spec.n, spec.d, std::move(features), std::move(labels));
}

}  // namespace detail

/// Draws the planted-support dataset. Positives come first (rows
/// [0, n_pos)), then negatives; n_pos = round(r*n). Fully deterministic in
/// the spec seed.
inline std::pair<Dataset, PlantedTruth> generate_synthetic(
    const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  PlantedTruth truth;
  truth.mu = spec.mu;
  truth.support = SupportSet::from_indices(
      rng.sample_without_replacement(spec.d, spec.k_star));
  return {detail::sample_planted(spec, truth.support, rng), std::move(truth)};
}

/// Samples a dataset with the signal planted on a caller-supplied support
/// instead of a freshly drawn one. This is how matched train/test pairs are
/// produced: the test set must carry the signal on the same coordinates.
inline Dataset generate_synthetic_on_support(const SyntheticSpec& spec,
                                             const SupportSet& support) {
  spec.validate();
  if (support.size() != spec.k_star ||
      (!support.indices.empty() && support.indices.back() >= spec.d)) {
    throw argument_error("support does not match the spec (size k_star, "
                         "indices in [0, d))");
  }
  Rng rng(spec.seed);
  return detail::sample_planted(spec, support, rng);
}

}  // namespace shtauc
