#pragma once

#include "gmentropy/covariance.hpp"
#include "gmentropy/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace gmentropy {

struct GaussianComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Covariance cov;
};

/// K ≥ 1 weighted Gaussian components over ℝ^m. Immutable once built;
/// weights must sum to one within 1e-12.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<GaussianComponent> components);

  Eigen::Index size() const { return static_cast<Eigen::Index>(components_.size()); }
  Eigen::Index dim() const { return dim_; }

  const GaussianComponent& component(Eigen::Index k) const;
  const std::vector<GaussianComponent>& components() const { return components_; }
  Eigen::VectorXd weights() const;

  /// True when every component shares one covariance matrix.
  bool has_shared_covariance() const;

  /// log Σ_k π_k N(x | μ_k, Σ_k), combined with log-sum-exp.
  double log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// One draw: component by weight, then μ_k + Γ_k z.
  void draw(CounterRng& rng, Eigen::Ref<Eigen::VectorXd> out) const;

 private:
  std::vector<GaussianComponent> components_;
  Eigen::Index dim_ = 0;
  std::vector<double> log_norm_;    // log π_k - ½(m log 2π + log|Σ_k|)
  std::vector<double> cumulative_;  // running weight sums for selection
};

/// log N(x | μ, Σ)
double log_gaussian_density(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& mean, const Covariance& cov);

/// ‖x − μ‖_Σ = |Γ⁻¹(x − μ)|
double mahalanobis_norm(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& mean, const Covariance& cov);

inline double log_density(const GaussianMixture& q, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return q.log_density(x);
}

/// n draws as the columns of an m×n matrix. Deterministic in seed and
/// independent of the worker count (each fixed-size chunk owns a split stream).
Eigen::MatrixXd sample(const GaussianMixture& q, std::size_t n, std::uint64_t seed);

/// Largest singular value of Σ_A^{-1/2} Σ_B^{1/2}. Diagonal pairs are exact;
/// otherwise power iteration on the Gram matrix until the eigen-residual is
/// below 1e-10 relative (at most 10 000 iterations, NumericalError beyond).
double op_norm_cross(const Covariance& a, const Covariance& b);

}  // namespace gmentropy
