#include "gmentropy/bounds.hpp"

#include "gmentropy/entropy.hpp"
#include "gmentropy/errors.hpp"
#include "gmentropy/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

namespace gmentropy {

namespace {

constexpr int kBisectionMaxIter = 200;

void check_pair(const GaussianMixture& q, Eigen::Index k, Eigen::Index kp) {
  if (k < 0 || kp < 0 || k >= q.size() || kp >= q.size()) throw UsageError("component index out of range");
  if (k == kp) throw UsageError("pair quantities need two distinct components");
}

void check_s(double s) {
  if (!(s > 0.0 && s < 1.0)) {
    throw UsageError("sharpness s must lie in the open interval (0,1), got " + std::to_string(s));
  }
}

// Point on the Pareto curve of (‖x−μ_k‖²_{Σ_k}, ‖x−μ_{k'}‖²_{Σ_{k'}}) with
// weight lambda on the first objective.
Eigen::VectorXd pareto_point(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::VectorXd& mk,
                             const Eigen::VectorXd& mkp, double lambda) {
  const Eigen::MatrixXd lhs = lambda * a + (1.0 - lambda) * b;
  const Eigen::VectorXd rhs = lambda * (a * mk) + (1.0 - lambda) * (b * mkp);
  return lhs.llt().solve(rhs);
}

double sum_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().sum(); }

// Determinant of the (m−1)×(m−1) matrix left after deleting row p and column c.
double minor_det(const Eigen::MatrixXd& g, Eigen::Index p, Eigen::Index c) {
  const Eigen::Index m = g.rows();
  if (m == 1) return 1.0;
  Eigen::MatrixXd sub(m - 1, m - 1);
  for (Eigen::Index r = 0, rr = 0; r < m; ++r) {
    if (r == p) continue;
    for (Eigen::Index col = 0, cc = 0; col < m; ++col) {
      if (col == c) continue;
      sub(rr, cc++) = g(r, col);
    }
    ++rr;
  }
  return sub.partialPivLu().determinant();
}

double upper_sum(const GaussianMixture& q, const Eigen::MatrixXd& alpha, double s) {
  const Eigen::VectorXd pi = q.weights();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < q.size(); ++k)
    for (Eigen::Index kp = 0; kp < q.size(); ++kp) {
      if (k == kp) continue;
      acc += std::sqrt(pi[k] * pi[kp]) * std::exp(-s * alpha(k, kp) * alpha(k, kp) / 4.0);
    }
  return acc;
}

double general_upper(const GaussianMixture& q, const Eigen::MatrixXd& alpha, double s) {
  const double m = static_cast<double>(q.dim());
  const double blowup = std::exp(-m / 4.0 * std::log1p(-s));
  return std::min(static_cast<double>(q.size()) / 2.0, 2.0 * blowup * upper_sum(q, alpha, s));
}

double shared_upper(const GaussianMixture& q, const Eigen::MatrixXd& alpha, double s) {
  const double km1 = static_cast<double>(q.size() - 1);
  const double blowup = std::exp(-km1 / 4.0 * std::log1p(-s));
  return 2.0 * blowup * upper_sum(q, alpha, s);
}

template <class UpperFn>
std::pair<double, double> choose_s(std::optional<double> s, UpperFn&& upper) {
  if (s) {
    check_s(*s);
    return {*s, upper(*s)};
  }
  double best_s = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (double candidate : s_grid()) {
    const double u = upper(candidate);
    if (u < best) {
      best = u;
      best_s = candidate;
    }
  }
  return {best_s, best};
}

}  // namespace

std::string_view to_string(BoundVariant variant) {
  return variant == BoundVariant::General ? "general" : "shared";
}

double alpha_pair(const GaussianMixture& q, Eigen::Index k, Eigen::Index kp) {
  check_pair(q, k, kp);
  const auto& a = q.component(k);
  const auto& b = q.component(kp);
  return mahalanobis_norm(a.mean, b.mean, a.cov) / (1.0 + op_norm_cross(a.cov, b.cov));
}

Eigen::VectorXd alpha_set_point(const GaussianMixture& q, Eigen::Index k, Eigen::Index kp, double tol) {
  check_pair(q, k, kp);
  const auto& ck = q.component(k);
  const auto& ckp = q.component(kp);
  if (ck.mean == ckp.mean) return ck.mean;
  const Eigen::MatrixXd a = ck.cov.inverse();
  const Eigen::MatrixXd b = ckp.cov.inverse();
  // The minimax point balances the two norms on the Pareto curve;
  // f − g is decreasing in the weight lambda, so bisect for its root.
  double lo = 0.0;
  double hi = 1.0;
  Eigen::VectorXd x = pareto_point(a, b, ck.mean, ckp.mean, 0.5);
  for (int iter = 0; iter < kBisectionMaxIter; ++iter) {
    const double mid = 0.5 * (lo + hi);
    x = pareto_point(a, b, ck.mean, ckp.mean, mid);
    const double gap = mahalanobis_norm(x, ck.mean, ck.cov) - mahalanobis_norm(x, ckp.mean, ckp.cov);
    if (std::abs(gap) <= tol || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon()) break;
    (gap > 0.0 ? lo : hi) = mid;
  }
  return x;
}

double alpha_set(const GaussianMixture& q, Eigen::Index k, Eigen::Index kp, double tol) {
  const Eigen::VectorXd x = alpha_set_point(q, k, kp, tol);
  const auto& ck = q.component(k);
  const auto& ckp = q.component(kp);
  return std::max(mahalanobis_norm(x, ck.mean, ck.cov), mahalanobis_norm(x, ckp.mean, ckp.cov));
}

AlphaMatrix alpha_matrix(const GaussianMixture& q, bool with_set_based) {
  const Eigen::Index K = q.size();
  AlphaMatrix out;
  out.pairwise = Eigen::MatrixXd::Zero(K, K);
  if (with_set_based) out.set_based = Eigen::MatrixXd::Zero(K, K);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index kp = 0; kp < K; ++kp) {
      if (k == kp) continue;
      out.pairwise(k, kp) = alpha_pair(q, k, kp);
      if (with_set_based && kp > k) {
        const double v = alpha_set(q, k, kp);
        (*out.set_based)(k, kp) = v;
        (*out.set_based)(kp, k) = v;
      }
    }
  return out;
}

CoefficientEstimate c_coefficient(const GaussianMixture& q, Eigen::Index k, Eigen::Index kp, std::size_t n,
                                  std::uint64_t seed) {
  check_pair(q, k, kp);
  const auto& ck = q.component(k);
  const auto& ckp = q.component(kp);
  if (covariances_coincide(ck.cov, ckp.cov)) return {0.5, 0.0, true};
  if (n == 0) throw UsageError("c_coefficient needs at least one sample");

  const Eigen::Index m = q.dim();
  const Eigen::MatrixXd gk = ck.cov.sqrt_factor();
  const Eigen::MatrixXd prec = ckp.cov.inverse();
  const Eigen::MatrixXd quad = Eigen::MatrixXd::Identity(m, m) - gk * prec * gk;
  const Eigen::VectorXd dir = gk * (prec * (ckp.mean - ck.mean));

  const std::size_t chunks = chunk_count(n);
  std::vector<std::size_t> hits(chunks, 0);
  const CounterRng root(seed);
  parallel_for(chunks, [&](std::size_t c) {
    CounterRng rng = root.split(c);
    Eigen::VectorXd y(m);
    const std::size_t begin = c * kSampleChunk;
    const std::size_t end = std::min(n, begin + kSampleChunk);
    std::size_t local = 0;
    for (std::size_t i = begin; i < end; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) y[j] = rng.normal();
      if (y.dot(quad * y) >= 0.0 && y.dot(dir) >= 0.0) ++local;
    }
    hits[c] = local;
  });
  std::size_t total = 0;
  for (auto h : hits) total += h;
  const double nd = static_cast<double>(n);
  const double p = static_cast<double>(total) / nd;
  return {p, std::sqrt(p * (1.0 - p) / nd), false};
}

std::vector<double> s_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 99; ++i) grid.push_back(i / 100.0);
  return grid;
}

BoundReport error_bounds_general(const GaussianMixture& q, std::optional<double> s, AlphaKind alpha_kind,
                                 std::size_t n_c, std::uint64_t seed) {
  if (s) check_s(*s);
  const Eigen::Index K = q.size();
  BoundReport report;
  report.variant = BoundVariant::General;
  report.alpha_kind = alpha_kind;
  report.alpha = alpha_matrix(q, alpha_kind == AlphaKind::SetBased);
  const Eigen::MatrixXd& exponent_alpha =
      alpha_kind == AlphaKind::SetBased ? *report.alpha.set_based : report.alpha.pairwise;

  std::tie(report.s_used, report.upper) =
      choose_s(s, [&](double sv) { return general_upper(q, exponent_alpha, sv); });

  report.c_estimates.assign(static_cast<std::size_t>(K * K), CoefficientEstimate{});
  const CounterRng root(seed);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index kp = 0; kp < K; ++kp) {
      if (k == kp) continue;
      const std::uint64_t stream = static_cast<std::uint64_t>(k * K + kp);
      const std::uint64_t pair_seed = root.split(stream)();
      report.c_estimates[static_cast<std::size_t>(k * K + kp)] = c_coefficient(q, k, kp, n_c, pair_seed);
    }

  const Eigen::VectorXd pi = q.weights();
  double max_log_det = -std::numeric_limits<double>::infinity();
  for (const auto& c : q.components()) max_log_det = std::max(max_log_det, c.cov.log_det());
  double lower = 0.0;
  double lower_var = 0.0;
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index kp = 0; kp < K; ++kp) {
      if (k == kp) continue;
      const auto& ck = q.component(k);
      const auto& ckp = q.component(kp);
      const double stretch = 1.0 + op_norm_cross(ckp.cov, ck.cov);
      const double a = report.alpha.pairwise(kp, k);
      const double log_term = std::log((1.0 - pi[k]) / pi[k]) + 0.5 * (ck.cov.log_det() - max_log_det) -
                              stretch * stretch * a * a / 2.0;
      const double coef = pi[k] * pi[kp] / (1.0 - pi[k]) * softplus(log_term);
      const auto& c = report.c(k, kp);
      lower += coef * c.value;
      lower_var += coef * coef * c.std_error * c.std_error;
    }
  report.lower = lower;
  report.lower_std_error = std::sqrt(lower_var);
  return report;
}

BoundReport error_bounds_shared(const GaussianMixture& q, std::optional<double> s, AlphaKind alpha_kind) {
  if (s) check_s(*s);
  const Eigen::Index K = q.size();
  if (K < 2) throw UnsupportedConfiguration("shared-covariance bounds need at least two components");
  if (q.dim() < K - 1) throw UnsupportedConfiguration("shared-covariance bounds need m >= K - 1");
  if (!q.has_shared_covariance()) throw UnsupportedConfiguration("shared-covariance bounds require coincident covariances");

  BoundReport report;
  report.variant = BoundVariant::Shared;
  report.alpha_kind = alpha_kind;
  report.alpha.pairwise = Eigen::MatrixXd::Zero(K, K);
  const Covariance& cov = q.component(0).cov;
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index kp = 0; kp < K; ++kp)
      if (k != kp) report.alpha.pairwise(k, kp) = 0.5 * mahalanobis_norm(q.component(k).mean, q.component(kp).mean, cov);
  if (alpha_kind == AlphaKind::SetBased) report.alpha.set_based = alpha_matrix(q, true).set_based;
  const Eigen::MatrixXd& exponent_alpha =
      alpha_kind == AlphaKind::SetBased ? *report.alpha.set_based : report.alpha.pairwise;

  std::tie(report.s_used, report.upper) =
      choose_s(s, [&](double sv) { return shared_upper(q, exponent_alpha, sv); });

  report.c_estimates.assign(static_cast<std::size_t>(K * K), CoefficientEstimate{0.5, 0.0, true});
  const Eigen::VectorXd pi = q.weights();
  double lower = 0.0;
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index kp = 0; kp < K; ++kp) {
      if (k == kp) continue;
      const double a = report.alpha.pairwise(kp, k);
      const double log_term = std::log((1.0 - pi[k]) / pi[k]) - 2.0 * a * a;
      lower += 0.5 * pi[k] * pi[kp] / (1.0 - pi[k]) * softplus(log_term);
    }
  report.lower = lower;
  return report;
}

DerivativeBoundReport derivative_bounds(const GaussianMixture& q, double s) {
  check_s(s);
  const Eigen::Index K = q.size();
  const Eigen::Index m = q.dim();
  const double md = static_cast<double>(m);
  const Eigen::VectorXd pi = q.weights();
  const double log1ms = std::log1p(-s);

  std::vector<double> inv_norm1(static_cast<std::size_t>(K));
  for (Eigen::Index k = 0; k < K; ++k) inv_norm1[static_cast<std::size_t>(k)] = sum_abs(q.component(k).cov.inverse_sqrt());

  Eigen::MatrixXd decay = Eigen::MatrixXd::Zero(K, K);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index kp = k + 1; kp < K; ++kp) {
      const double a = std::max(alpha_pair(q, k, kp), alpha_pair(q, kp, k));
      decay(k, kp) = decay(kp, k) = std::exp(-s * a * a / 4.0);
    }

  DerivativeBoundReport out;
  out.s_used = s;
  out.mu_bounds = Eigen::MatrixXd::Zero(K, m);
  out.pi_bounds = Eigen::VectorXd::Zero(K);
  const double mu_pre = 2.0 * std::exp(-(md + 2.0) / 4.0 * log1ms);
  const double gamma_pre = 6.0 * std::exp(-(md + 4.0) / 4.0 * log1ms);
  const double pi_pre = 8.0 * std::exp(-md / 4.0 * log1ms);

  for (Eigen::Index k = 0; k < K; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Eigen::MatrixXd gamma = q.component(k).cov.sqrt_factor();
    const double det = std::exp(0.5 * q.component(k).cov.log_det());
    Eigen::MatrixXd cofactor_ratio(m, m);
    for (Eigen::Index p = 0; p < m; ++p)
      for (Eigen::Index c = 0; c < m; ++c) cofactor_ratio(p, c) = 2.0 * std::abs(minor_det(gamma, p, c)) / det;

    double mu_sum = 0.0;
    Eigen::MatrixXd gamma_sum = Eigen::MatrixXd::Zero(m, m);
    double pi_sum = 0.0;
    for (Eigen::Index kp = 0; kp < K; ++kp) {
      if (kp == k) continue;
      const double root = std::sqrt(pi[k] * pi[kp]);
      const double inv_pair = inv_norm1[ks] + inv_norm1[static_cast<std::size_t>(kp)];
      mu_sum += root * inv_pair * decay(k, kp);
      gamma_sum.array() += root * (cofactor_ratio.array() + inv_pair) * decay(k, kp);
      pi_sum += std::sqrt(pi[kp] / pi[k]) * decay(k, kp);
    }
    out.mu_bounds.row(k).setConstant(mu_pre * mu_sum);
    out.gamma_bounds.push_back(gamma_pre * gamma_sum);
    out.pi_bounds[k] = pi_pre * pi_sum;
  }
  return out;
}

double probabilistic_bound_rhs(BoundVariant variant, int K, int m, double c, double s, double eps) {
  check_s(s);
  if (!(eps > 0.0)) throw UsageError("epsilon must be positive");
  if (!(c > 0.0)) throw UsageError("c must be positive");
  if (K < 1 || m < 1) throw UsageError("K and m must be positive");
  const double km1 = static_cast<double>(K - 1);
  const double md = static_cast<double>(m);
  const double spread = std::log1p(s * c * c / 2.0);
  if (variant == BoundVariant::General) {
    const double log_base = 0.5 * std::log1p(-s) + spread;
    return 2.0 * km1 / eps * std::exp(-md / 2.0 * log_base);
  }
  return 2.0 * km1 / (eps * std::exp(km1 / 4.0 * std::log1p(-s))) * std::exp(-md / 2.0 * spread);
}

}  // namespace gmentropy
