#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "shtauc/dataset.hpp"
#include "shtauc/errors.hpp"
#include "shtauc/objective.hpp"
#include "shtauc/rng.hpp"
#include "shtauc/vector_ops.hpp"

namespace shtauc {

/// Inputs to the convergence-theory calculators. d, n and b enter the
/// closed forms only through logarithms/ratios and are kept real-valued so
/// the formulas can be probed at non-integer points.
struct TheoryParams {
  std::size_t k = 1;       // relaxed sparsity level
  std::size_t k_star = 1;  // true sparsity
  double d = 2.0;          // dimension
  double n = 1.0;          // sample count
  double b = 1.0;          // block size
  double r = 0.5;          // imbalance ratio, in (0, 1/2]
  double lambda = 1.0;     // lambda_min(Sigma^{1/2})

  void validate() const {
    if (k_star < 1 || k < k_star) {
      throw argument_error("need k >= k_star >= 1");
    }
    if (!(r > 0.0) || r > 0.5) {
      throw argument_error("imbalance ratio must lie in (0, 0.5]");
    }
    if (!(lambda > 0.0)) throw argument_error("lambda must be positive");
    if (!(d > 1.0) || !(n > 0.0) || !(b >= 1.0)) {
      throw argument_error("need d > 1, n > 0, b >= 1");
    }
  }

  /// Restricted index s = 2k + k_star appearing in all the bounds.
  double restricted_index() const {
    return static_cast<double>(2 * k + k_star);
  }

  /// log(d) * (log(b)/2 + log(d)), the log factor shared by the bounds.
  double log_factor() const {
    return std::log(d) * (0.5 * std::log(b) + std::log(d));
  }
};

/// Relaxation constant: nu = 1 + k_star/k + sqrt(k_star/k). Equals 3 at
/// k = k_star and decays toward 1 as the budget is relaxed.
inline double nu(std::size_t k, std::size_t k_star) {
  if (k_star < 1 || k < k_star) throw argument_error("need k >= k_star >= 1");
  const double ratio = static_cast<double>(k_star) / static_cast<double>(k);
  return 1.0 + ratio + std::sqrt(ratio);
}

/// Convergence parameter kappa = sqrt(nu (1 - 1/rho)). Contraction (linear
/// convergence) needs kappa < 1, i.e. rho < nu/(nu - 1).
inline double kappa(double nu_value, double rho) {
  if (!(rho >= 1.0)) {
    throw domain_error("restricted condition number must be >= 1");
  }
  return std::sqrt(nu_value * (1.0 - 1.0 / rho));
}

/// Output of the Gaussian RSC/RSS evaluation. When the sample size is too
/// small for the lower bound to be positive the regime is violated: the raw
/// rho_minus is still reported but rho/kappa are left NaN.
struct ConvergenceConstants {
  double nu = std::numeric_limits<double>::quiet_NaN();
  double rho_minus = std::numeric_limits<double>::quiet_NaN();
  double rho_plus = std::numeric_limits<double>::quiet_NaN();
  double rho = std::numeric_limits<double>::quiet_NaN();
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double step_size_suggestion = std::numeric_limits<double>::quiet_NaN();
  bool regime_ok = false;
  bool contraction = false;
};

/// Evaluates the Gaussian-design RSC/RSS closed forms at s = 2k + k_star:
///   rho_minus = (lambda/2 - 6 sqrt(2) sqrt(s log(d)/(r n)))^2
///               - (32/3) s log(d)/(r n)
///   rho_plus  = 16 s log(d) (log(b)/2 + log(d)) / r
/// These are the high-probability bounds; only the deterministic formulas
/// are computed here. The suggested step size is 1/rho_plus.
inline ConvergenceConstants gaussian_rsc_rss(const TheoryParams& params) {
  params.validate();
  const double s = params.restricted_index();
  const double log_d = std::log(params.d);
  const double per_sample = s * log_d / (params.r * params.n);

  ConvergenceConstants out;
  out.nu = nu(params.k, params.k_star);
  out.rho_plus = 16.0 * s * params.log_factor() / params.r;
  out.step_size_suggestion = 1.0 / out.rho_plus;

  const double bracket =
      0.5 * params.lambda - 6.0 * std::sqrt(2.0) * std::sqrt(per_sample);
  out.rho_minus = bracket * bracket - 32.0 / 3.0 * per_sample;
  out.regime_ok = bracket > 0.0 && out.rho_minus > 0.0;
  if (!out.regime_ok) return out;

  out.rho = out.rho_plus / out.rho_minus;
  if (out.rho >= 1.0) {
    out.kappa = kappa(out.nu, out.rho);
    out.contraction = out.kappa < 1.0;
  }
  return out;
}

/// Coefficients of the restricted-condition-number curve
///   rho(r) = 16 / (a r + b sqrt(r) + c),
/// a concave quadratic in sqrt(r) whose minimum sits at sqrt(r_star). Past
/// that axis of symmetry rho(r) is non-increasing in r: more balance means
/// better conditioning.
struct CurveCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double sqrt_r_star = 0.0;
};

inline CurveCoefficients curve_coefficients(const TheoryParams& params) {
  params.validate();
  const double k = static_cast<double>(params.k);
  const double log_term = k * params.log_factor();

  CurveCoefficients coeffs;
  coeffs.a = params.lambda * params.lambda / (4.0 * log_term);
  coeffs.b = -6.0 * std::sqrt(2.0) * params.lambda /
             std::sqrt(params.n * log_term);
  coeffs.c = 184.0 /
             (3.0 * params.n * (0.5 * std::log(params.b) + std::log(params.d)));
  coeffs.sqrt_r_star = 12.0 * std::sqrt(2.0) * std::sqrt(log_term) /
                       (params.lambda * std::sqrt(params.n));
  return coeffs;
}

inline double evaluate_curve(const CurveCoefficients& coeffs, double r) {
  const double sqrt_r = std::sqrt(r);
  return 16.0 / (coeffs.a * r + coeffs.b * sqrt_r + coeffs.c);
}

struct CurvePoint {
  double r = 0.0;
  double rho = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;  // false where the denominator is not positive
};

/// rho(r) over a grid of imbalance ratios in (0, 1/2].
inline std::vector<CurvePoint> condition_number_curve(
    const TheoryParams& params, const std::vector<double>& r_grid) {
  const CurveCoefficients coeffs = curve_coefficients(params);
  std::vector<CurvePoint> curve;
  curve.reserve(r_grid.size());
  for (double r : r_grid) {
    if (!(r > 0.0) || r > 0.5) {
      throw argument_error("curve grid points must lie in (0, 0.5]");
    }
    CurvePoint point;
    point.r = r;
    const double denom =
        coeffs.a * r + coeffs.b * std::sqrt(r) + coeffs.c;
    if (denom > 0.0) {
      point.rho = 16.0 / denom;
      point.valid = true;
    }
    curve.push_back(point);
  }
  return curve;
}

/// Pieces of the tolerance-error closed form, exposed so the composition
/// can be cross-checked against the kappa calculator.
struct ToleranceBreakdown {
  double numerator = 0.0;
  /// X in kappa = sqrt((1 + nu)(1 - X)); equals 1/rho of an effective
  /// restricted condition number.
  double curvature_term = 0.0;
  double kappa = 0.0;
  double value = 0.0;
};

/// Tolerance error sigma_{w*}/(1 - kappa) for the Gaussian design:
///   numerator   = 4 r ||w*||_2 + sqrt(r / (2 n rho(Sigma) (2k+k*) log d))
///   denominator = 1 - sqrt((1+nu)(1 - (3 lambda^2/(128 k log d)) r
///                 + (9 sqrt(2) lambda/(16 sqrt(k log(d) n_minus)) + 1/n) sqrt(r)
///                 - 27/(4n)))
/// with n_minus = (1-r) n. The bound is vacuous unless the inner kappa is
/// below 1.
inline ToleranceBreakdown tolerance_error_breakdown(
    const TheoryParams& params, double norm_w_star,
    double sigma_spectral_bound) {
  params.validate();
  if (!(norm_w_star >= 0.0)) throw argument_error("||w*||_2 must be >= 0");
  if (!(sigma_spectral_bound > 0.0)) {
    throw argument_error("spectral bound rho(Sigma) must be positive");
  }
  const double k = static_cast<double>(params.k);
  const double log_d = std::log(params.d);
  const double n_minus = (1.0 - params.r) * params.n;

  ToleranceBreakdown out;
  out.numerator =
      4.0 * params.r * norm_w_star +
      std::sqrt(params.r / (2.0 * params.n * sigma_spectral_bound *
                            params.restricted_index() * log_d));

  const double quadratic_coeff =
      3.0 * params.lambda * params.lambda / (128.0 * k * log_d);
  const double sqrt_coeff =
      9.0 * std::sqrt(2.0) * params.lambda /
          (16.0 * std::sqrt(k * log_d * n_minus)) +
      1.0 / params.n;
  out.curvature_term = quadratic_coeff * params.r -
                       sqrt_coeff * std::sqrt(params.r) +
                       27.0 / (4.0 * params.n);

  const double inner = 1.0 - out.curvature_term;
  if (inner < 0.0) {
    throw domain_error("tolerance-error root argument is negative");
  }
  out.kappa = std::sqrt((1.0 + nu(params.k, params.k_star)) * inner);
  if (out.kappa >= 1.0) {
    throw domain_error("kappa >= 1: the tolerance bound is vacuous");
  }
  out.value = out.numerator / (1.0 - out.kappa);
  return out;
}

inline double tolerance_error(const TheoryParams& params, double norm_w_star,
                              double sigma_spectral_bound) {
  return tolerance_error_breakdown(params, norm_w_star, sigma_spectral_bound)
      .value;
}

/// Empirical witnesses for the restricted curvature of F on a concrete
/// dataset.
struct RestrictedEigEstimate {
  double rho_minus_hat = 0.0;
  double rho_plus_hat = 0.0;
};

/// Draws `probes` random s-sparse unit vectors (support uniform without
/// replacement, standard normal values, normalized) and evaluates the exact
/// quadratic forms: rho_minus_hat is the minimum of v'(hessian F)v and
/// rho_plus_hat the maximum of the per-block forms v'(hessian f_B)v over
/// probes and blocks. Witness estimates, not certificates. Probe p uses a
/// seed derived from (seed, p), so results do not depend on evaluation
/// order. Without a partition the whole dataset acts as a single block.
inline RestrictedEigEstimate empirical_restricted_eigs(
    const Dataset& data, std::size_t s, std::size_t probes, std::uint64_t seed,
    const BlockPartition* partition = nullptr) {
  if (s < 1 || s > data.d()) throw argument_error("need 1 <= s <= d");
  if (probes < 1) throw argument_error("need at least one probe");
  data.require_both_classes();
  const ClassMeans means = class_means(data);

  BlockPartition whole;
  if (partition == nullptr) {
    whole.block_size = data.n();
    whole.blocks.emplace_back(data.n());
    std::iota(whole.blocks[0].begin(), whole.blocks[0].end(), std::size_t{0});
    partition = &whole;
  }

  RestrictedEigEstimate out;
  out.rho_minus_hat = std::numeric_limits<double>::infinity();
  out.rho_plus_hat = -std::numeric_limits<double>::infinity();

  Vector probe(data.d());
  for (std::size_t p = 0; p < probes; ++p) {
    Rng rng(derive_seed(seed, 0x9B0BEULL, p));
    double norm = 0.0;
    while (norm == 0.0) {
      std::fill(probe.begin(), probe.end(), 0.0);
      for (std::size_t i : rng.sample_without_replacement(data.d(), s)) {
        probe[i] = rng.normal();
      }
      norm = norm2(probe);
    }
    for (double& x : probe) x /= norm;

    out.rho_minus_hat =
        std::min(out.rho_minus_hat, hessian_quadratic_form(data, means, probe));
    for (const auto& block : partition->blocks) {
      out.rho_plus_hat =
          std::max(out.rho_plus_hat,
                   block_hessian_quadratic_form(data, means, block, probe));
    }
  }
  return out;
}

}  // namespace shtauc
