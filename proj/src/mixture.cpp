#include "gmentropy/mixture.hpp"

#include "gmentropy/errors.hpp"
#include "gmentropy/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace gmentropy {

namespace {

constexpr double kWeightSumTol = 1e-12;
constexpr double kPowerTol = 1e-10;
constexpr int kPowerMaxIter = 10000;

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

}  // namespace

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw UsageError("a mixture needs at least one component");
  dim_ = components_.front().mean.size();
  if (dim_ == 0) throw UsageError("mixture dimension must be positive");
  double total = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    if (c.mean.size() != dim_ || c.cov.dim() != dim_) {
      throw UsageError("component " + std::to_string(k) + " has mismatched dimension");
    }
    if (!(c.weight > 0.0) || c.weight > 1.0) {
      throw UsageError("component " + std::to_string(k) + " weight must lie in (0, 1]");
    }
    if (!c.mean.allFinite()) throw UsageError("component " + std::to_string(k) + " mean is not finite");
    total += c.weight;
    log_norm_.push_back(std::log(c.weight) - 0.5 * (static_cast<double>(dim_) * kLog2Pi + c.cov.log_det()));
    cumulative_.push_back(total);
  }
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw UsageError("mixture weights must sum to 1 (got " + std::to_string(total) + ")");
  }
}

const GaussianComponent& GaussianMixture::component(Eigen::Index k) const {
  if (k < 0 || k >= size()) throw UsageError("component index out of range");
  return components_[static_cast<std::size_t>(k)];
}

Eigen::VectorXd GaussianMixture::weights() const {
  Eigen::VectorXd w(size());
  for (Eigen::Index k = 0; k < size(); ++k) w[k] = components_[static_cast<std::size_t>(k)].weight;
  return w;
}

bool GaussianMixture::has_shared_covariance() const {
  const auto& first = components_.front().cov;
  return std::all_of(components_.begin() + 1, components_.end(),
                     [&](const GaussianComponent& c) { return covariances_coincide(first, c.cov); });
}

double GaussianMixture::log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim_) throw UsageError("dimension mismatch in log_density");
  thread_local std::vector<double> terms;
  thread_local Eigen::VectorXd diff;
  terms.resize(components_.size());
  diff.resize(dim_);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < components_.size(); ++k) {
    diff = x - components_[k].mean;
    terms[k] = log_norm_[k] - 0.5 * components_[k].cov.squared_norm(diff);
    top = std::max(top, terms[k]);
  }
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

void GaussianMixture::draw(CounterRng& rng, Eigen::Ref<Eigen::VectorXd> out) const {
  const double u = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                              components_.size() - 1);
  thread_local Eigen::VectorXd z;
  z.resize(dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) z[i] = rng.normal();
  out = components_[k].mean + components_[k].cov.color(z);
}

double log_gaussian_density(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& mean, const Covariance& cov) {
  if (x.size() != cov.dim() || mean.size() != cov.dim()) {
    throw UsageError("dimension mismatch in log_gaussian_density");
  }
  return -0.5 * (static_cast<double>(cov.dim()) * kLog2Pi + cov.log_det() + cov.squared_norm(x - mean));
}

double mahalanobis_norm(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& mean, const Covariance& cov) {
  if (x.size() != cov.dim() || mean.size() != cov.dim()) {
    throw UsageError("dimension mismatch in mahalanobis_norm");
  }
  return std::sqrt(cov.squared_norm(x - mean));
}

Eigen::MatrixXd sample(const GaussianMixture& q, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw UsageError("sample count must be at least 1");
  Eigen::MatrixXd out(q.dim(), static_cast<Eigen::Index>(n));
  const CounterRng root(seed);
  parallel_for(chunk_count(n), [&](std::size_t c) {
    CounterRng rng = root.split(c);
    const std::size_t begin = c * kSampleChunk;
    const std::size_t end = std::min(n, begin + kSampleChunk);
    for (std::size_t i = begin; i < end; ++i) q.draw(rng, out.col(static_cast<Eigen::Index>(i)));
  });
  return out;
}

double op_norm_cross(const Covariance& a, const Covariance& b) {
  if (a.dim() != b.dim()) throw UsageError("dimension mismatch in op_norm_cross");
  if (a.is_diagonal() && b.is_diagonal()) {
    return (b.variances().array() / a.variances().array()).sqrt().maxCoeff();
  }
  // Gram matrix of T = Γ_A⁻¹ Γ_B is Tᵀ T; its top eigenvalue is ‖T‖²_op.
  const Eigen::MatrixXd t = a.inverse_sqrt() * b.sqrt_factor();
  const Eigen::MatrixXd gram = t.transpose() * t;
  const Eigen::Index m = gram.rows();
  Eigen::VectorXd x(m);
  for (Eigen::Index i = 0; i < m; ++i) x[i] = 1.0 + 0.1 * static_cast<double>(i) / static_cast<double>(m);
  x.normalize();
  Eigen::VectorXd y(m);
  for (int iter = 1; iter <= kPowerMaxIter; ++iter) {
    y.noalias() = gram * x;
    const double rayleigh = x.dot(y);
    if (!(rayleigh > 0.0)) throw NumericalError("power iteration collapsed to a non-positive Rayleigh quotient");
    const double residual = (y - rayleigh * x).norm();
    if (residual <= kPowerTol * rayleigh) return std::sqrt(rayleigh);
    x = y / y.norm();
  }
  throw NumericalError("op_norm_cross: power iteration did not converge within " +
                       std::to_string(kPowerMaxIter) + " iterations");
}

}  // namespace gmentropy
