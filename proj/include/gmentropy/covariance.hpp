#pragma once

#include <Eigen/Dense>

#include <memory>

namespace gmentropy {

enum class CovarianceKind { Isotropic, Diagonal, Full };

/// Positive-definite covariance with its symmetric square root
/// Γ = Σ^{1/2}, Γ⁻¹ and log|Σ| cached at construction.
///
/// Isotropic and diagonal covariances are stored as a variance vector and
/// never materialise dense m×m matrices unless a dense accessor is called.
/// Full matrices are validated for symmetry (relative 1e-12) and strict
/// positive definiteness (λ_min > 1e-12·λ_max).
class Covariance {
 public:
  static Covariance isotropic(Eigen::Index dim, double variance);
  static Covariance diagonal(Eigen::VectorXd variances);
  static Covariance full(Eigen::MatrixXd matrix);

  Eigen::Index dim() const { return dim_; }
  CovarianceKind kind() const { return kind_; }
  bool is_diagonal() const { return kind_ != CovarianceKind::Full; }

  double log_det() const { return log_det_; }

  /// Variances of a diagonal or isotropic covariance. Throws for Full.
  const Eigen::VectorXd& variances() const;

  /// Eigenvalues of Σ in ascending order.
  Eigen::VectorXd eigenvalues() const;

  Eigen::MatrixXd matrix() const;
  Eigen::MatrixXd sqrt_factor() const;
  Eigen::MatrixXd inverse_sqrt() const;
  Eigen::MatrixXd inverse() const;

  /// Γ⁻¹ v
  Eigen::VectorXd whiten(const Eigen::Ref<const Eigen::VectorXd>& v) const;
  /// Γ z
  Eigen::VectorXd color(const Eigen::Ref<const Eigen::VectorXd>& z) const;
  /// |Γ⁻¹ v|², without allocating for diagonal kinds.
  double squared_norm(const Eigen::Ref<const Eigen::VectorXd>& v) const;

 private:
  struct Dense {
    Eigen::MatrixXd sigma;
    Eigen::MatrixXd sqrt;
    Eigen::MatrixXd inv_sqrt;
    Eigen::VectorXd eigenvalues;
  };

  Covariance() = default;

  Eigen::Index dim_ = 0;
  CovarianceKind kind_ = CovarianceKind::Isotropic;
  double log_det_ = 0.0;
  Eigen::VectorXd variances_;
  Eigen::VectorXd inv_sd_;
  std::shared_ptr<const Dense> dense_;
};

/// True when both covariances describe the same matrix up to a relative
/// entrywise tolerance.
bool covariances_coincide(const Covariance& a, const Covariance& b, double rtol = 1e-12);

}  // namespace gmentropy
