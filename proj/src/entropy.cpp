#include "gmentropy/entropy.hpp"

#include "gmentropy/errors.hpp"
#include "gmentropy/gauss_hermite.hpp"
#include "gmentropy/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace gmentropy {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// log Σ exp(terms)
double log_sum_exp(const std::vector<double>& terms) {
  const double top = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

// Running mean / sum of squared deviations, merged pairwise in chunk order.
struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    const double delta = x - mean;
    mean += delta / count;
    m2 += delta * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.count == 0.0) return;
    const double total = count + o.count;
    const double delta = o.mean - mean;
    mean += delta * o.count / total;
    m2 += o.m2 + delta * delta * count * o.count / total;
    count = total;
  }

  double std_error() const { return count > 1.0 ? std::sqrt(m2 / (count - 1.0) / count) : 0.0; }
};

// Draws n values f(rng) in fixed chunks, each chunk on its own split stream.
template <class Fn>
Moments chunked_moments(std::size_t n, std::uint64_t seed, Fn&& per_draw) {
  const std::size_t chunks = chunk_count(n);
  std::vector<Moments> partial(chunks);
  const CounterRng root(seed);
  parallel_for(chunks, [&](std::size_t c) {
    CounterRng rng = root.split(c);
    const std::size_t begin = c * kSampleChunk;
    const std::size_t end = std::min(n, begin + kSampleChunk);
    Moments local;
    for (std::size_t i = begin; i < end; ++i) local.add(per_draw(rng));
    partial[c] = local;
  });
  Moments total;
  for (const auto& p : partial) total.merge(p);
  return total;
}

std::vector<double> log_weights(const GaussianMixture& q) {
  std::vector<double> lw;
  for (const auto& c : q.components()) lw.push_back(std::log(c.weight));
  return lw;
}

void require_shared_covariance(const GaussianMixture& q, const char* what) {
  if (!q.has_shared_covariance()) {
    throw UnsupportedConfiguration(std::string(what) + " requires coincident covariances");
  }
}

// Variances of a covariance that is diagonal in fact, even when stored Full.
std::optional<Eigen::VectorXd> diagonal_variances(const Covariance& cov) {
  if (cov.is_diagonal()) return cov.variances();
  const Eigen::MatrixXd m = cov.matrix();
  Eigen::MatrixXd off = m;
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() != 0.0) return std::nullopt;
  return Eigen::VectorXd(m.diagonal());
}

Covariance sum_covariance(const Covariance& a, const Covariance& b) {
  if (a.is_diagonal() && b.is_diagonal()) return Covariance::diagonal(a.variances() + b.variances());
  return Covariance::full(a.matrix() + b.matrix());
}

}  // namespace

std::string_view to_string(EntropyMethod method) {
  switch (method) {
    case EntropyMethod::Ours: return "ours";
    case EntropyMethod::Huber0: return "huber0";
    case EntropyMethod::Huber2: return "huber2";
    case EntropyMethod::Bonilla: return "bonilla";
    case EntropyMethod::MonteCarlo: return "mc";
    case EntropyMethod::GaussHermiteExact: return "gh";
    case EntropyMethod::ReducedMC: return "reduced";
  }
  return "unknown";
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

EntropyEstimate entropy_ours(const GaussianMixture& q) {
  const double m = static_cast<double>(q.dim());
  double value = 0.5 * m * (1.0 + kLog2Pi);
  for (const auto& c : q.components()) {
    value += 0.5 * c.weight * c.cov.log_det() - c.weight * std::log(c.weight);
  }
  return {value, EntropyMethod::Ours, std::nullopt, std::nullopt};
}

EntropyEstimate entropy_huber(const GaussianMixture& q, HuberOrder order) {
  const auto& comps = q.components();
  const std::size_t K = comps.size();
  const auto lw = log_weights(q);

  Eigen::VectorXd shared_var;
  if (order == HuberOrder::Two) {
    require_shared_covariance(q, "second-order Huber approximation");
    auto v = diagonal_variances(comps.front().cov);
    if (!v) throw UnsupportedConfiguration("second-order Huber approximation requires diagonal covariances");
    shared_var = *v;
  }

  std::vector<double> terms(K);
  double value = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < K; ++j) {
      terms[j] = lw[j] + log_gaussian_density(comps[k].mean, comps[j].mean, comps[j].cov);
    }
    const double log_g0 = log_sum_exp(terms);
    double bracket = log_g0;
    if (order == HuberOrder::Two) {
      // C_{k,i} = g2/g0 − (g1/g0)², with g·/g0 expressed through the
      // normalised responsibilities of each component at μ_k.
      double curvature = 0.0;
      for (Eigen::Index i = 0; i < q.dim(); ++i) {
        const double var = shared_var[i];
        double g1 = 0.0;
        double g2 = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
          const double r = std::exp(terms[j] - log_g0);
          const double slope = (comps[k].mean[i] - comps[j].mean[i]) / var;
          g1 += r * slope;
          g2 += r * (slope * slope - 1.0 / var);
        }
        curvature += var * (g2 - g1 * g1);
      }
      bracket += 0.5 * curvature;
    }
    value -= comps[k].weight * bracket;
  }
  return {value, order == HuberOrder::Zero ? EntropyMethod::Huber0 : EntropyMethod::Huber2, std::nullopt,
          std::nullopt};
}

EntropyEstimate entropy_bonilla(const GaussianMixture& q, BonillaWeighting weighting) {
  const auto& comps = q.components();
  const std::size_t K = comps.size();
  const auto lw = log_weights(q);
  std::vector<double> terms(K);
  double value = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < K; ++j) {
      const Covariance both = sum_covariance(comps[k].cov, comps[j].cov);
      terms[j] = log_gaussian_density(comps[k].mean, comps[j].mean, both);
      if (weighting == BonillaWeighting::Weighted) terms[j] += lw[j];
    }
    value -= comps[k].weight * log_sum_exp(terms);
  }
  return {value, EntropyMethod::Bonilla, std::nullopt, std::nullopt};
}

EntropyEstimate entropy_mc(const GaussianMixture& q, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw UsageError("Monte Carlo entropy needs at least 2 samples");
  const Moments mom = chunked_moments(n, seed, [&q](CounterRng& rng) {
    thread_local Eigen::VectorXd x;
    x.resize(q.dim());
    q.draw(rng, x);
    return -q.log_density(x);
  });
  return {mom.mean, EntropyMethod::MonteCarlo, mom.std_error(), n};
}

EntropyEstimate entropy_exact_k2(const GaussianMixture& q, std::size_t n_nodes) {
  if (q.size() != 2) throw UnsupportedConfiguration("entropy_exact_k2 requires exactly two components");
  require_shared_covariance(q, "entropy_exact_k2");
  const auto& c1 = q.component(0);
  const auto& c2 = q.component(1);
  const double a = 0.5 * mahalanobis_norm(c1.mean, c2.mean, c1.cov);
  const GaussHermiteRule& rule = cached_gauss_hermite(n_nodes);

  const double pi[2] = {c1.weight, c2.weight};
  double correction = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double log_ratio = std::log(pi[1 - k] / pi[k]);
    double integral = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      integral += rule.weights[j] *
                  softplus(log_ratio - 2.0 * a * a + 2.0 * std::numbers::sqrt2 * a * rule.nodes[j]);
    }
    correction += pi[k] / std::sqrt(std::numbers::pi) * integral;
  }
  return {entropy_ours(q).value - correction, EntropyMethod::GaussHermiteExact, std::nullopt, std::nullopt};
}

Eigen::MatrixXd reduced_offsets(const GaussianMixture& q, Eigen::Index k) {
  const Eigen::Index K = q.size();
  const Eigen::Index m = q.dim();
  if (K < 2) throw UnsupportedConfiguration("reduced form needs at least two components");
  if (m < K - 1) throw UnsupportedConfiguration("reduced form needs m >= K - 1");
  require_shared_covariance(q, "reduced-dimension entropy");
  const auto& base = q.component(k);
  Eigen::MatrixXd diffs(m, K - 1);
  Eigen::Index col = 0;
  for (Eigen::Index j = 0; j < K; ++j) {
    if (j == k) continue;
    diffs.col(col++) = base.cov.whiten(q.component(j).mean - base.mean);
  }
  // R_k = Qᵀ from the Householder factorisation; Qᵀ·diffs is upper
  // triangular, so every rotated offset lives in the first K−1 coordinates.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(diffs);
  const Eigen::MatrixXd rotated = qr.householderQ().transpose() * diffs;
  return rotated.topRows(K - 1);
}

EntropyEstimate entropy_reduced_mc(const GaussianMixture& q, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw UsageError("reduced Monte Carlo entropy needs at least 2 samples");
  const Eigen::Index K = q.size();
  std::vector<Eigen::MatrixXd> offsets;
  std::vector<Eigen::VectorXd> shifts;  // log(π_{k'}/π_k) − |u_{k',k}|²/2
  for (Eigen::Index k = 0; k < K; ++k) {
    offsets.push_back(reduced_offsets(q, k));
    Eigen::VectorXd s(K - 1);
    Eigen::Index col = 0;
    for (Eigen::Index j = 0; j < K; ++j) {
      if (j == k) continue;
      s[col] = std::log(q.component(j).weight / q.component(k).weight) -
               0.5 * offsets.back().col(col).squaredNorm();
      ++col;
    }
    shifts.push_back(std::move(s));
  }
  const Eigen::VectorXd pi = q.weights();

  const Moments mom = chunked_moments(n, seed, [&](CounterRng& rng) {
    thread_local Eigen::VectorXd v;
    thread_local std::vector<double> terms;
    v.resize(K - 1);
    terms.resize(static_cast<std::size_t>(K));
    for (Eigen::Index i = 0; i < K - 1; ++i) v[i] = rng.normal();
    double total = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      terms[0] = 0.0;
      const Eigen::VectorXd e = shifts[static_cast<std::size_t>(k)] +
                                offsets[static_cast<std::size_t>(k)].transpose() * v;
      for (Eigen::Index j = 0; j < K - 1; ++j) terms[static_cast<std::size_t>(j + 1)] = e[j];
      total += pi[k] * log_sum_exp(terms);
    }
    return total;
  });
  return {entropy_ours(q).value - mom.mean, EntropyMethod::ReducedMC, mom.std_error(), n};
}

}  // namespace gmentropy
