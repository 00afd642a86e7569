#pragma once

#include "gmentropy/bounds.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gmentropy {

enum class SweepMethod { Ours, Huber0, Huber2, Bonilla, MonteCarlo };

std::string_view to_string(SweepMethod method);
std::optional<SweepMethod> parse_sweep_method(std::string_view name);

/// Relative-error experiment on K = 2 mixtures with Σ = I, μ₁ = 0 and
/// μ₂ ~ N(0, (2c)² I), scored against the Gauss–Hermite entropy.
struct SweepConfig {
  std::vector<int> dims{1, 2, 5, 10, 20, 50, 100, 200};
  double c = 0.1;
  std::array<double, 2> weights{0.5, 0.5};
  std::size_t n_trials = 50;
  std::vector<SweepMethod> methods{SweepMethod::Ours, SweepMethod::Huber2, SweepMethod::Huber0,
                                   SweepMethod::Bonilla, SweepMethod::MonteCarlo};
  std::uint64_t seed = 0;
  std::size_t mc_points = 1000;
  std::size_t gh_nodes = 100;

  /// 500 trials per dimension and m up to 500.
  static SweepConfig full_scale();

  void validate() const;
};

SweepConfig sweep_config_from_json(const nlohmann::json& doc);
nlohmann::json sweep_config_to_json(const SweepConfig& cfg);

struct SweepRecord {
  int m = 0;
  SweepMethod method = SweepMethod::Ours;
  double mean_rel_err = 0.0;
  double min_rel_err = 0.0;
  double max_rel_err = 0.0;
  std::size_t n_trials = 0;
};

std::vector<SweepRecord> run_relative_error_sweep(const SweepConfig& cfg);

/// Header `m,method,mean_rel_err,min_rel_err,max_rel_err,n_trials`.
std::string sweep_csv(const std::vector<SweepRecord>& records);
std::string sweep_svg(const std::vector<SweepRecord>& records, const SweepConfig& cfg);

struct ProbabilisticCheck {
  double empirical_prob = 0.0;
  double rhs = 0.0;
  double binomial_sigma = 0.0;
  std::size_t exceedances = 0;
  std::size_t n_trials = 0;
};

/// Draws Σ^{-1/2}(μ₁ − μ₂)/2 ~ N(0, c² I) with Σ = I, measures |H − H̃| via
/// Gauss–Hermite, and compares the exceedance rate of eps with the
/// shared-covariance probabilistic bound. Only K = 2 is supported.
ProbabilisticCheck run_probabilistic_check(int K, int m, double c, double eps, double s, std::size_t n_trials,
                                           std::uint64_t seed, std::array<double, 2> weights = {0.5, 0.5});

}  // namespace gmentropy
