#pragma once

// Reference computations used only by the tests. They share no code with the
// library: closed forms in long double, Golub–Welsch quadrature, composite
// Simpson integration and tensor-product Gauss–Hermite.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

using ld = long double;

inline constexpr ld kPi = 3.141592653589793238462643383279502884L;
inline const ld kLog2Pi = std::log(2.0L * kPi);

inline ld gaussian_entropy(int m, ld log_det) { return 0.5L * (m * (1.0L + kLog2Pi) + log_det); }

inline ld log_normal_1d(ld x, ld mean, ld var) {
  return -0.5L * (kLog2Pi + std::log(var)) - (x - mean) * (x - mean) / (2.0L * var);
}

inline ld log_sum_exp(const std::vector<ld>& v) {
  ld mx = v[0];
  for (ld x : v) mx = std::max(mx, x);
  ld s = 0;
  for (ld x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

/// Composite Simpson rule with n (even) panels.
inline ld simpson(const std::function<ld(ld)>& f, ld a, ld b, int n) {
  if (n % 2) ++n;
  const ld h = (b - a) / n;
  ld s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0L : 2.0L) * f(a + h * i);
  return s * h / 3.0L;
}

/// −∫ f log f for the 1-D mixture Σ p_i N(mean_i, var_i).
inline ld entropy_1d(const std::vector<ld>& p, const std::vector<ld>& mean, const std::vector<ld>& var,
                     int panels = 400000) {
  ld lo = mean[0], hi = mean[0], sd = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    lo = std::min(lo, mean[i]);
    hi = std::max(hi, mean[i]);
    sd = std::max(sd, std::sqrt(var[i]));
  }
  lo -= 16 * sd;
  hi += 16 * sd;
  auto integrand = [&](ld x) {
    std::vector<ld> terms;
    for (std::size_t i = 0; i < p.size(); ++i) terms.push_back(std::log(p[i]) + log_normal_1d(x, mean[i], var[i]));
    const ld lf = log_sum_exp(terms);
    return -std::exp(lf) * lf;
  };
  return simpson(integrand, lo, hi, panels);
}

/// Two components sharing Σ: whitening reduces the entropy to a 1-D
/// mixture along the mean difference plus m−1 standard-normal directions.
inline ld entropy_k2_shared(ld p1, ld p2, ld mahalanobis_distance, int m, ld log_det) {
  const ld h1 = entropy_1d({p1, p2}, {0.0L, mahalanobis_distance}, {1.0L, 1.0L});
  return h1 + 0.5L * (m - 1) * (1.0L + kLog2Pi) + 0.5L * log_det;
}

/// Golub–Welsch rule for ∫ e^{-t²} g(t) dt.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> golub_welsch(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(i / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Eigen::VectorXd w = es.eigenvectors().row(0).transpose().array().square() * std::sqrt(static_cast<double>(kPi));
  return {es.eigenvalues(), w};
}

/// log of Σ_k π_k N(x | μ_k, G_k G_kᵀ); G_k need not be symmetric.
inline double log_mixture(const std::vector<double>& pi, const std::vector<Eigen::VectorXd>& mu,
                          const std::vector<Eigen::MatrixXd>& G, const Eigen::VectorXd& x) {
  const auto m = static_cast<double>(x.size());
  std::vector<ld> terms;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    const Eigen::VectorXd z = G[k].partialPivLu().solve(x - mu[k]);
    const ld logdet = std::log(std::abs(static_cast<ld>(G[k].determinant())));
    terms.push_back(std::log(static_cast<ld>(pi[k])) - 0.5L * m * kLog2Pi - logdet - 0.5L * z.squaredNorm());
  }
  return static_cast<double>(log_sum_exp(terms));
}

/// −Σ_k π_k E_{z~N(0,I)} log q(μ_k + G_k z) by an n^m tensor Gauss–Hermite grid.
inline double entropy_tensor(const std::vector<double>& pi, const std::vector<Eigen::VectorXd>& mu,
                             const std::vector<Eigen::MatrixXd>& G, int n) {
  const auto [t, w] = golub_welsch(n);
  const int m = static_cast<int>(mu[0].size());
  const std::size_t K = pi.size();
  std::vector<Eigen::MatrixXd> inv(K);
  std::vector<double> log_norm(K);
  for (std::size_t k = 0; k < K; ++k) {
    inv[k] = G[k].inverse();
    log_norm[k] = std::log(pi[k]) - 0.5 * m * static_cast<double>(kLog2Pi) - std::log(std::abs(G[k].determinant()));
  }
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  ld total = 0;
  Eigen::VectorXd z(m), x(m);
  std::vector<double> terms(K);
  for (;;) {
    ld weight = 1;
    for (int d = 0; d < m; ++d) {
      z(d) = std::sqrt(2.0) * t(idx[static_cast<std::size_t>(d)]);
      weight *= w(idx[static_cast<std::size_t>(d)]) / std::sqrt(kPi);
    }
    for (std::size_t k = 0; k < K; ++k) {
      x = mu[k] + G[k] * z;
      double mx = -INFINITY;
      for (std::size_t j = 0; j < K; ++j) {
        terms[j] = log_norm[j] - 0.5 * (inv[j] * (x - mu[j])).squaredNorm();
        mx = std::max(mx, terms[j]);
      }
      double acc = 0;
      for (double v : terms) acc += std::exp(v - mx);
      total -= pi[k] * weight * (mx + std::log(acc));
    }
    int d = 0;
    while (d < m && ++idx[static_cast<std::size_t>(d)] == n) idx[static_cast<std::size_t>(d++)] = 0;
    if (d == m) break;
  }
  return static_cast<double>(total);
}

}  // namespace oracle
