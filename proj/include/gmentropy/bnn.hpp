#pragma once

#include "gmentropy/mixture.hpp"
#include "gmentropy/mlp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gmentropy {

struct DataPoint {
  double x = 0.0;
  double y = 0.0;
};
using Dataset = std::vector<DataPoint>;

/// x uniform on x_range, y = x·sin(x) + N(0, noise_std²).
Dataset generate_dataset(std::size_t n, double noise_std, std::pair<double, double> x_range, std::uint64_t seed);

/// Mixture posterior with diagonal components. σ_k = softplus(ρ_k), π = softmax(logits).
struct VariationalPosterior {
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::VectorXd> rhos;
  Eigen::VectorXd logits;

  Eigen::Index components() const { return static_cast<Eigen::Index>(means.size()); }
  Eigen::Index dim() const { return means.empty() ? 0 : means.front().size(); }

  Eigen::VectorXd weights() const;
  Eigen::VectorXd sigma(Eigen::Index k) const;

  /// μ_k ~ N(0, 1/fan_in) per layer with one stream per component,
  /// σ_k = 0.05, uniform logits.
  static VariationalPosterior initialize(const MLPSpec& spec, std::size_t K, std::uint64_t seed);

  /// Flat parameter vector [μ_0 … μ_{K−1}, ρ_0 … ρ_{K−1}, logits].
  Eigen::VectorXd pack() const;
  void unpack(const Eigen::Ref<const Eigen::VectorXd>& flat);
  Eigen::Index parameter_count() const { return components() * (2 * dim() + 1); }

  GaussianMixture to_mixture() const;

  void validate(const MLPSpec& spec) const;
};

/// p(w) = N(0, σ_w² I)
struct Prior {
  double sigma_w = 1e6;
};

enum class Optimizer { Adam, Sgd };

std::string to_string(Optimizer o);
Optimizer parse_optimizer(const std::string& s);

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 0.05;
  double prior_std = 1e6;
  double likelihood_std = 1e-2;
  std::size_t batch_size = 0;  // 0 means the whole dataset
  std::uint64_t seed = 0;
  std::size_t K = 5;
  Optimizer optimizer = Optimizer::Adam;

  void validate() const;
};

/// Per-component pieces of the approximate objective.
struct ElboTerms {
  std::vector<double> log_likelihood;  // (N/M) Σ_i log N(y_i | f(x_i; σ_k∘ε + μ_k), σ_y²)
  std::vector<double> cross_entropy;   // −H(q_k, p), closed form
  std::vector<double> entropy;         // H(N(μ_k, Σ_k))
  double value = 0.0;
};

ElboTerms elbo_terms(const VariationalPosterior& q, const Prior& prior, const MLPSpec& spec, const Dataset& batch,
                     std::size_t full_n, const Eigen::Ref<const Eigen::VectorXd>& eps, double likelihood_std);

/// Σ_k π_k (L̂_k − log π_k)
double elbo(const VariationalPosterior& q, const Prior& prior, const MLPSpec& spec, const Dataset& batch,
            std::size_t full_n, const Eigen::Ref<const Eigen::VectorXd>& eps, double likelihood_std);

struct ElboGradient {
  double value = 0.0;
  Eigen::VectorXd grad;  // same layout as VariationalPosterior::pack()
};

ElboGradient elbo_gradient(const VariationalPosterior& q, const Prior& prior, const MLPSpec& spec,
                           const Dataset& batch, std::size_t full_n, const Eigen::Ref<const Eigen::VectorXd>& eps,
                           double likelihood_std);

struct TrainResult {
  VariationalPosterior posterior;
  std::vector<double> elbo_trace;  // objective at each step, before the update
};

/// Full-batch stochastic ascent with one fresh ε per step.
/// Throws NumericalError on a non-finite objective or parameter.
TrainResult train(const MLPSpec& spec, const TrainConfig& cfg, const Dataset& data);

/// Trailing moving average with the given window (shorter at the start).
std::vector<double> smooth(const std::vector<double>& trace, std::size_t window);

struct Prediction {
  double x = 0.0;
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> component_means;  // f(x; μ_k)
};

std::vector<Prediction> predict(const VariationalPosterior& q, const MLPSpec& spec, const std::vector<double>& xs,
                                std::size_t n_samples_per_component, std::uint64_t seed, double likelihood_std);

}  // namespace gmentropy
