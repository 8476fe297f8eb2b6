#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "shtauc/errors.hpp"

namespace shtauc {

/// Dense weight/feature vector. The paper's regime (d ~ 1e3..1e4) is served
/// fine by dense storage.
using Vector = std::vector<double>;

inline bool all_finite(const Vector& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

inline double dot(const Vector& a, const Vector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double squared_norm(const Vector& v) { return dot(v, v); }

inline double norm2(const Vector& v) { return std::sqrt(squared_norm(v)); }

inline std::size_t l0_norm(const Vector& v) {
  std::size_t count = 0;
  for (double x : v) count += (x != 0.0);
  return count;
}

/// Strictly increasing set of coordinate indices.
struct SupportSet {
  std::vector<std::size_t> indices;

  SupportSet() = default;

  /// Builds from arbitrary order; rejects duplicates.
  static SupportSet from_indices(std::vector<std::size_t> idx) {
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
      throw argument_error("support set has duplicate indices");
    }
    SupportSet s;
    s.indices = std::move(idx);
    return s;
  }

  std::size_t size() const { return indices.size(); }

  bool contains(std::size_t i) const {
    return std::binary_search(indices.begin(), indices.end(), i);
  }
};

/// Indices of entries with |v_i| > truncate_eps.
inline SupportSet support(const Vector& v, double truncate_eps = 0.0) {
  SupportSet s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > truncate_eps) s.indices.push_back(i);
  }
  return s;
}

/// Orthogonal projection onto the coordinates in omega: keeps v_i for
/// i in omega, zeroes the rest.
inline Vector project(const Vector& v, const SupportSet& omega) {
  Vector out(v.size(), 0.0);
  for (std::size_t i : omega.indices) {
    if (i >= v.size()) {
      throw dimension_error("support index " + std::to_string(i) +
                            " out of range for dimension " +
                            std::to_string(v.size()));
    }
    out[i] = v[i];
  }
  return out;
}

namespace detail {

/// Floyd-Rivest SELECT: places the k-th smallest (0-based, ascending)
/// element of a[left..right] at position k and partitions around it.
/// Expected linear time. The canonical algorithm is implemented here; the
/// sort-based oracle in the test suite is the conformance authority.
inline void floyd_rivest_select(std::vector<double>& a, std::ptrdiff_t left,
                                std::ptrdiff_t right, std::ptrdiff_t k) {
  while (right > left) {
    if (right - left > 600) {
      // Narrow to a sample-estimated bracket around rank k first.
      const double n = static_cast<double>(right - left + 1);
      const double i = static_cast<double>(k - left + 1);
      const double z = std::log(n);
      const double s = 0.5 * std::exp(2.0 * z / 3.0);
      double sd = 0.5 * std::sqrt(z * s * (n - s) / n);
      if (i < n / 2.0) sd = -sd;
      const auto new_left = std::max(
          left, static_cast<std::ptrdiff_t>(k - i * s / n + sd));
      const auto new_right = std::min(
          right, static_cast<std::ptrdiff_t>(k + (n - i) * s / n + sd));
      floyd_rivest_select(a, new_left, new_right, k);
    }
    const double t = a[k];
    std::ptrdiff_t i = left;
    std::ptrdiff_t j = right;
    std::swap(a[left], a[k]);
    if (a[right] > t) std::swap(a[right], a[left]);
    while (i < j) {
      std::swap(a[i], a[j]);
      ++i;
      --j;
      while (a[i] < t) ++i;
      while (a[j] > t) --j;
    }
    if (a[left] == t) {
      std::swap(a[left], a[j]);
    } else {
      ++j;
      std::swap(a[j], a[right]);
    }
    if (j <= k) left = j + 1;
    if (k <= j) right = j - 1;
  }
}

inline void check_budget(std::size_t k, std::size_t d) {
  if (d == 0) throw argument_error("selection on an empty vector");
  if (k < 1 || k > d) {
    throw argument_error("sparsity budget k=" + std::to_string(k) +
                         " outside [1, " + std::to_string(d) + "]");
  }
}

}  // namespace detail

/// k-th largest value among |v_1|,...,|v_d|, counting multiplicity.
/// Expected O(d); operates on a scratch copy, so the input is not mutated.
inline double select_kth_magnitude(const Vector& v, std::size_t k) {
  detail::check_budget(k, v.size());
  std::vector<double> mags(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) mags[i] = std::abs(v[i]);
  // k-th largest == (d-k)-th smallest under ascending order.
  const auto rank = static_cast<std::ptrdiff_t>(v.size() - k);
  detail::floyd_rivest_select(mags, 0, static_cast<std::ptrdiff_t>(v.size()) - 1,
                              rank);
  return mags[static_cast<std::size_t>(rank)];
}

/// Hard thresholding H_k: keeps the k largest-magnitude coordinates of v
/// and zeroes the rest, so the result has at most k nonzeros. Ties at the
/// threshold magnitude are resolved toward the lowest indices, which keeps
/// the operator deterministic and the budget exact.
inline Vector hard_threshold(const Vector& v, std::size_t k) {
  detail::check_budget(k, v.size());
  if (k == v.size()) return v;

  const double tau = select_kth_magnitude(v, k);
  std::size_t remaining = k;
  for (double x : v) {
    if (std::abs(x) > tau) --remaining;
  }
  Vector out(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]);
    if (mag > tau) {
      out[i] = v[i];
    } else if (mag == tau && remaining > 0) {
      out[i] = v[i];
      --remaining;
    }
  }
  return out;
}

}  // namespace shtauc
