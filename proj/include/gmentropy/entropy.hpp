#pragma once

#include "gmentropy/mixture.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace gmentropy {

enum class EntropyMethod { Ours, Huber0, Huber2, Bonilla, MonteCarlo, GaussHermiteExact, ReducedMC };

std::string_view to_string(EntropyMethod method);

/// An entropy value in nats. std_error and n_samples are set only for the
/// stochastic methods (MonteCarlo, ReducedMC).
struct EntropyEstimate {
  double value = 0.0;
  EntropyMethod method = EntropyMethod::Ours;
  std::optional<double> std_error;
  std::optional<std::size_t> n_samples;
};

enum class HuberOrder { Zero = 0, Two = 2 };

/// Inner sum of the Jensen-type lower bound: as printed (unit weights) or
/// weighted by π_{k'} like the original derivation.
enum class BonillaWeighting { AsPrinted, Weighted };

inline constexpr std::size_t kDefaultHermiteNodes = 100;

/// Sum of the component entropies minus the entropy of the weights:
/// m/2 + (m/2)log 2π + ½Σπ_k log|Σ_k| − Σπ_k log π_k.
EntropyEstimate entropy_ours(const GaussianMixture& q);

/// Taylor expansion of log q around each mean. Order 2 needs coincident
/// diagonal covariances.
EntropyEstimate entropy_huber(const GaussianMixture& q, HuberOrder order);

EntropyEstimate entropy_bonilla(const GaussianMixture& q,
                                BonillaWeighting weighting = BonillaWeighting::AsPrinted);

/// −(1/n) Σ log q(x_i), x_i ~ q, with std_error = sd / √n.
EntropyEstimate entropy_mc(const GaussianMixture& q, std::size_t n, std::uint64_t seed);

/// Exact entropy of a two-component mixture with one shared covariance,
/// reduced to a one-dimensional Gauss–Hermite integral.
EntropyEstimate entropy_exact_k2(const GaussianMixture& q, std::size_t n_nodes = kDefaultHermiteNodes);

/// Exact entropy for coincident covariances as a (K−1)-dimensional
/// Gaussian integral, estimated by Monte Carlo.
EntropyEstimate entropy_reduced_mc(const GaussianMixture& q, std::size_t n, std::uint64_t seed);

/// Column j holds u_{k',k} for the j-th k' ≠ k (ascending): the whitened mean
/// offsets μ_{k'} − μ_k rotated into the first K−1 coordinates by Householder
/// reflections. Requires coincident covariances and m ≥ K − 1.
Eigen::MatrixXd reduced_offsets(const GaussianMixture& q, Eigen::Index k);

/// log(1 + e^x) without overflow.
double softplus(double x);

}  // namespace gmentropy
