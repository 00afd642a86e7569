#include "gmentropy/covariance.hpp"

#include "gmentropy/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gmentropy {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kConditionFloor = 1e-12;

void check_variances(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw UsageError("covariance dimension must be positive");
  const double vmax = v.maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || !(v[i] > 0.0)) {
      throw UsageError("covariance variances must be finite and positive (entry " +
                       std::to_string(i) + ")");
    }
    if (v[i] <= kConditionFloor * vmax) {
      throw UsageError("covariance is numerically singular (λ_min <= 1e-12·λ_max)");
    }
  }
}

}  // namespace

Covariance Covariance::isotropic(Eigen::Index dim, double variance) {
  if (dim <= 0) throw UsageError("covariance dimension must be positive");
  Covariance c = diagonal(Eigen::VectorXd::Constant(dim, variance));
  c.kind_ = CovarianceKind::Isotropic;
  return c;
}

Covariance Covariance::diagonal(Eigen::VectorXd variances) {
  check_variances(variances);
  Covariance c;
  c.dim_ = variances.size();
  c.kind_ = CovarianceKind::Diagonal;
  c.log_det_ = variances.array().log().sum();
  c.inv_sd_ = variances.array().sqrt().inverse().matrix();
  c.variances_ = std::move(variances);
  return c;
}

Covariance Covariance::full(Eigen::MatrixXd matrix) {
  if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
    throw UsageError("full covariance must be a non-empty square matrix");
  }
  if (!matrix.allFinite()) throw UsageError("full covariance has non-finite entries");
  const double scale = matrix.cwiseAbs().maxCoeff();
  const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * scale) {
    throw UsageError("full covariance is not symmetric (max |Σ-Σᵀ| = " + std::to_string(asym) + ")");
  }
  matrix = 0.5 * (matrix + matrix.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of covariance failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lmax = lambda.maxCoeff();
  if (!(lambda.minCoeff() > kConditionFloor * lmax) || !(lmax > 0.0)) {
    throw UsageError("covariance is not positive definite (λ_min <= 1e-12·λ_max)");
  }

  const Eigen::MatrixXd& v = eig.eigenvectors();
  const Eigen::VectorXd root = lambda.array().sqrt().matrix();
  auto dense = std::make_shared<Dense>();
  dense->sqrt = v * root.asDiagonal() * v.transpose();
  dense->inv_sqrt = v * root.cwiseInverse().asDiagonal() * v.transpose();
  dense->eigenvalues = lambda;
  dense->sigma = std::move(matrix);

  Covariance c;
  c.dim_ = dense->sigma.rows();
  c.kind_ = CovarianceKind::Full;
  c.log_det_ = lambda.array().log().sum();
  c.dense_ = std::move(dense);
  return c;
}

const Eigen::VectorXd& Covariance::variances() const {
  if (kind_ == CovarianceKind::Full) throw UsageError("variances() requires a diagonal covariance");
  return variances_;
}

Eigen::VectorXd Covariance::eigenvalues() const {
  if (kind_ == CovarianceKind::Full) return dense_->eigenvalues;
  Eigen::VectorXd v = variances_;
  std::sort(v.data(), v.data() + v.size());
  return v;
}

Eigen::MatrixXd Covariance::matrix() const {
  if (kind_ == CovarianceKind::Full) return dense_->sigma;
  return variances_.asDiagonal();
}

Eigen::MatrixXd Covariance::sqrt_factor() const {
  if (kind_ == CovarianceKind::Full) return dense_->sqrt;
  return variances_.array().sqrt().matrix().asDiagonal();
}

Eigen::MatrixXd Covariance::inverse_sqrt() const {
  if (kind_ == CovarianceKind::Full) return dense_->inv_sqrt;
  return inv_sd_.asDiagonal();
}

Eigen::MatrixXd Covariance::inverse() const {
  if (kind_ == CovarianceKind::Full) return dense_->inv_sqrt * dense_->inv_sqrt;
  return variances_.cwiseInverse().asDiagonal();
}

Eigen::VectorXd Covariance::whiten(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  if (v.size() != dim_) throw UsageError("dimension mismatch in whiten");
  if (kind_ == CovarianceKind::Full) return dense_->inv_sqrt * v;
  return v.cwiseProduct(inv_sd_);
}

Eigen::VectorXd Covariance::color(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  if (z.size() != dim_) throw UsageError("dimension mismatch in color");
  if (kind_ == CovarianceKind::Full) return dense_->sqrt * z;
  return z.cwiseQuotient(inv_sd_);
}

double Covariance::squared_norm(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  if (v.size() != dim_) throw UsageError("dimension mismatch in squared_norm");
  if (kind_ == CovarianceKind::Full) {
    thread_local Eigen::VectorXd scratch;
    scratch.resize(dim_);
    scratch.noalias() = dense_->inv_sqrt * v;
    return scratch.squaredNorm();
  }
  return v.cwiseProduct(inv_sd_).squaredNorm();
}

bool covariances_coincide(const Covariance& a, const Covariance& b, double rtol) {
  if (a.dim() != b.dim()) return false;
  if (a.is_diagonal() && b.is_diagonal()) {
    const auto& va = a.variances();
    const auto& vb = b.variances();
    const double scale = std::max(va.cwiseAbs().maxCoeff(), vb.cwiseAbs().maxCoeff());
    return (va - vb).cwiseAbs().maxCoeff() <= rtol * scale;
  }
  const Eigen::MatrixXd ma = a.matrix();
  const Eigen::MatrixXd mb = b.matrix();
  const double scale = std::max(ma.cwiseAbs().maxCoeff(), mb.cwiseAbs().maxCoeff());
  return (ma - mb).cwiseAbs().maxCoeff() <= rtol * scale;
}

}  // namespace gmentropy
