#pragma once

#include "gmentropy/mixture.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace gmentropy {

/// Pairwise separations. pairwise(k, k') = α_{k,k'} (diagonal unused);
/// set_based(k, k') = α_{{k,k'}} when the minimax solver was run.
struct AlphaMatrix {
  Eigen::MatrixXd pairwise;
  std::optional<Eigen::MatrixXd> set_based;
};

/// Standard-normal mass of the region entering the lower bound.
struct CoefficientEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = false;
};

enum class BoundVariant { General, Shared };
enum class AlphaKind { Pairwise, SetBased };

std::string_view to_string(BoundVariant variant);

struct BoundReport {
  double lower = 0.0;
  /// Standard error of `lower` propagated from the Monte Carlo c_{k,k'}.
  double lower_std_error = 0.0;
  double upper = 0.0;
  double s_used = 0.5;
  BoundVariant variant = BoundVariant::General;
  AlphaKind alpha_kind = AlphaKind::Pairwise;
  AlphaMatrix alpha;
  /// K×K, row-major; diagonal entries unused. Empty for the shared variant.
  std::vector<CoefficientEstimate> c_estimates;

  const CoefficientEstimate& c(Eigen::Index k, Eigen::Index kp) const {
    return c_estimates[static_cast<std::size_t>(k * alpha.pairwise.rows() + kp)];
  }
};

struct DerivativeBoundReport {
  Eigen::MatrixXd mu_bounds;                // K×m
  std::vector<Eigen::MatrixXd> gamma_bounds;  // K matrices, m×m
  Eigen::VectorXd pi_bounds;                // K
  double s_used = 0.5;
};

/// ‖μ_k − μ_{k'}‖_{Σ_k} / (1 + ‖Σ_k^{-1/2} Σ_{k'}^{1/2}‖_op)
double alpha_pair(const GaussianMixture& q, Eigen::Index k, Eigen::Index kp);

/// Largest α for which the open Mahalanobis α-balls around μ_k and μ_{k'}
/// are disjoint, i.e. min_x max(‖x−μ_k‖_{Σ_k}, ‖x−μ_{k'}‖_{Σ_{k'}}).
double alpha_set(const GaussianMixture& q, Eigen::Index k, Eigen::Index kp, double tol = 1e-12);

/// Minimiser x* of the problem solved by alpha_set (exposed for tests).
Eigen::VectorXd alpha_set_point(const GaussianMixture& q, Eigen::Index k, Eigen::Index kp,
                                double tol = 1e-12);

AlphaMatrix alpha_matrix(const GaussianMixture& q, bool with_set_based);

/// Exactly 1/2 for equal covariances, otherwise a Monte Carlo estimate of
/// P(y·y ≥ (Γ_k Σ_{k'}⁻¹ Γ_k y)·y and y·Γ_k Σ_{k'}⁻¹(μ_{k'}−μ_k) ≥ 0), y ~ N(0, I).
CoefficientEstimate c_coefficient(const GaussianMixture& q, Eigen::Index k, Eigen::Index kp,
                                  std::size_t n, std::uint64_t seed);

/// The 99-point grid {0.01, …, 0.99} searched when s is chosen automatically.
std::vector<double> s_grid();

/// Upper and lower bounds on |H − H̃| for arbitrary covariances.
/// s = nullopt picks the grid value minimising the upper bound.
BoundReport error_bounds_general(const GaussianMixture& q, std::optional<double> s, AlphaKind alpha,
                                 std::size_t n_c, std::uint64_t seed);

/// Sharper bounds when all components share one covariance.
BoundReport error_bounds_shared(const GaussianMixture& q, std::optional<double> s,
                                AlphaKind alpha = AlphaKind::Pairwise);

/// Upper bounds on the partial derivatives of H − H̃ with respect to
/// μ_{k,p}, γ_{k,pq} (entries of Γ_k) and π_k.
DerivativeBoundReport derivative_bounds(const GaussianMixture& q, double s);

/// Right-hand side of the probabilistic error inequality.
double probabilistic_bound_rhs(BoundVariant variant, int K, int m, double c, double s, double eps);

}  // namespace gmentropy
