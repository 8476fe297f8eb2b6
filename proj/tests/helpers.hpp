#pragma once

// Test-only oracles: sort-based selection, finite differences, a dense
// Hessian builder with a Jacobi eigensolver. These stay independent of the
// library code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "shtauc/dataset.hpp"
#include "shtauc/objective.hpp"
#include "shtauc/rng.hpp"
#include "shtauc/vector_ops.hpp"

namespace testing_oracles {

using shtauc::ClassMeans;
using shtauc::Dataset;
using shtauc::Rng;
using shtauc::Vector;

/// k-th largest magnitude via full sort.
inline double sort_select_oracle(const Vector& v, std::size_t k) {
  std::vector<double> mags(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) mags[i] = std::abs(v[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  return mags[k - 1];
}

/// Top-k projection with the lowest-index tie rule, via stable sort.
inline Vector hard_threshold_oracle(const Vector& v, std::size_t k) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double ma = std::abs(v[a]);
                     const double mb = std::abs(v[b]);
                     if (ma != mb) return ma > mb;
                     return a < b;
                   });
  Vector out(v.size(), 0.0);
  for (std::size_t i = 0; i < k; ++i) out[order[i]] = v[order[i]];
  return out;
}

/// Random vector with duplicates and zeros mixed in.
inline Vector random_vector(Rng& rng, std::size_t d) {
  Vector v(d);
  for (double& x : v) {
    switch (rng.uniform_index(4)) {
      case 0:
        x = 0.0;
        break;
      case 1:  // small integer grid forces ties
        x = static_cast<double>(rng.uniform_index(7)) - 3.0;
        break;
      default:
        x = rng.normal();
    }
  }
  return v;
}

/// Random two-class dataset with standard normal features.
inline Dataset random_dataset(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<double> features(n * d);
  for (double& x : features) x = rng.normal();
  std::vector<std::int8_t> labels(n);
  for (auto& y : labels) y = rng.uniform_index(2) == 0 ? -1 : 1;
  labels[0] = 1;  // both classes guaranteed
  labels[n - 1] = -1;
  return Dataset(n, d, std::move(features), std::move(labels));
}

/// Central finite differences of the single-sum objective.
inline Vector finite_difference_gradient(const Dataset& data,
                                         const ClassMeans& means,
                                         const Vector& w, double step) {
  Vector grad(w.size());
  Vector probe = w;
  for (std::size_t j = 0; j < w.size(); ++j) {
    probe[j] = w[j] + step;
    const double up = shtauc::erm_objective(data, means, probe);
    probe[j] = w[j] - step;
    const double down = shtauc::erm_objective(data, means, probe);
    probe[j] = w[j];
    grad[j] = (up - down) / (2.0 * step);
  }
  return grad;
}

/// Explicit d x d Hessian of F (row-major), built from the per-class
/// deviation outer products plus the rank-one cross term.
inline std::vector<double> dense_hessian(const Dataset& data,
                                         const ClassMeans& means) {
  const std::size_t d = data.d();
  std::vector<double> hessian(d * d, 0.0);
  auto add_outer = [&](const Vector& u, double coeff) {
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        hessian[a * d + b] += coeff * u[a] * u[b];
      }
    }
  };
  Vector dev(d);
  for (std::size_t i = 0; i < data.n(); ++i) {
    auto x = data.row(i);
    const Vector& mean =
        data.label(i) == 1 ? means.mean_pos : means.mean_neg;
    for (std::size_t j = 0; j < d; ++j) dev[j] = x[j] - mean[j];
    add_outer(dev, 2.0 / static_cast<double>(data.label(i) == 1
                                                 ? data.n_pos()
                                                 : data.n_neg()));
  }
  Vector delta(d);
  for (std::size_t j = 0; j < d; ++j) {
    delta[j] = means.mean_neg[j] - means.mean_pos[j];
  }
  add_outer(delta, 2.0);
  return hessian;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations. For the
/// small dimensions used in tests this converges to machine precision.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a,
                                              std::size_t d) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) off += a[p * d + q] * a[p * d + q];
    }
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a[p * d + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < d; ++i) {
          const double aip = a[i * d + p];
          const double aiq = a[i * d + q];
          a[i * d + p] = c * aip - s * aiq;
          a[i * d + q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < d; ++i) {
          const double api = a[p * d + i];
          const double aqi = a[q * d + i];
          a[p * d + i] = c * api - s * aqi;
          a[q * d + i] = s * api + c * aqi;
        }
      }
    }
  }
  std::vector<double> eigenvalues(d);
  for (std::size_t i = 0; i < d; ++i) eigenvalues[i] = a[i * d + i];
  std::sort(eigenvalues.begin(), eigenvalues.end());
  return eigenvalues;
}

}  // namespace testing_oracles
