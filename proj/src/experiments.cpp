#include "gmentropy/experiments.hpp"

#include "gmentropy/entropy.hpp"
#include "gmentropy/errors.hpp"
#include "gmentropy/format.hpp"
#include "gmentropy/parallel.hpp"
#include "gmentropy/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gmentropy {

namespace {

GaussianMixture two_component(const Eigen::VectorXd& mu2, const std::array<double, 2>& weights) {
  const Eigen::Index m = mu2.size();
  const Covariance identity = Covariance::isotropic(m, 1.0);
  return GaussianMixture({{weights[0], Eigen::VectorXd::Zero(m), identity}, {weights[1], mu2, identity}});
}

double approximate(const GaussianMixture& q, SweepMethod method, std::size_t mc_points, std::uint64_t seed) {
  switch (method) {
    case SweepMethod::Ours: return entropy_ours(q).value;
    case SweepMethod::Huber0: return entropy_huber(q, HuberOrder::Zero).value;
    case SweepMethod::Huber2: return entropy_huber(q, HuberOrder::Two).value;
    case SweepMethod::Bonilla: return entropy_bonilla(q).value;
    case SweepMethod::MonteCarlo: return entropy_mc(q, mc_points, seed).value;
  }
  throw UsageError("unknown sweep method");
}

}  // namespace

std::string_view to_string(SweepMethod method) {
  switch (method) {
    case SweepMethod::Ours: return "ours";
    case SweepMethod::Huber0: return "huber0";
    case SweepMethod::Huber2: return "huber2";
    case SweepMethod::Bonilla: return "bonilla";
    case SweepMethod::MonteCarlo: return "mc";
  }
  return "unknown";
}

std::optional<SweepMethod> parse_sweep_method(std::string_view name) {
  for (auto m : {SweepMethod::Ours, SweepMethod::Huber0, SweepMethod::Huber2, SweepMethod::Bonilla,
                 SweepMethod::MonteCarlo}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

SweepConfig SweepConfig::full_scale() {
  SweepConfig cfg;
  cfg.dims = {1, 2, 5, 10, 20, 50, 100, 200, 300, 400, 500};
  cfg.n_trials = 500;
  return cfg;
}

void SweepConfig::validate() const {
  if (dims.empty()) throw UsageError("sweep needs at least one dimension");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 1) throw UsageError("sweep dimensions must be positive");
    if (i > 0 && dims[i] <= dims[i - 1]) throw UsageError("sweep dimensions must be strictly ascending");
  }
  if (!(c > 0.0)) throw UsageError("sweep c must be positive");
  if (!(weights[0] > 0.0 && weights[1] > 0.0) || std::abs(weights[0] + weights[1] - 1.0) > 1e-12) {
    throw UsageError("sweep weights must be positive and sum to 1");
  }
  if (n_trials == 0) throw UsageError("sweep needs at least one trial");
  if (methods.empty()) throw UsageError("sweep needs at least one method");
  if (mc_points < 2) throw UsageError("Monte Carlo baseline needs at least 2 points");
  if (gh_nodes == 0) throw UsageError("Gauss-Hermite node count must be positive");
}

SweepConfig sweep_config_from_json(const nlohmann::json& doc) {
  SweepConfig cfg;
  try {
    if (doc.contains("dims")) cfg.dims = doc.at("dims").get<std::vector<int>>();
    if (doc.contains("c")) cfg.c = doc.at("c").get<double>();
    if (doc.contains("weights")) {
      const auto w = doc.at("weights").get<std::vector<double>>();
      if (w.size() != 2) throw UsageError("sweep weights must have two entries");
      cfg.weights = {w[0], w[1]};
    }
    if (doc.contains("n_trials")) cfg.n_trials = doc.at("n_trials").get<std::size_t>();
    if (doc.contains("methods")) {
      cfg.methods.clear();
      for (const auto& name : doc.at("methods").get<std::vector<std::string>>()) {
        const auto m = parse_sweep_method(name);
        if (!m) throw UsageError("unknown sweep method '" + name + "'");
        cfg.methods.push_back(*m);
      }
    }
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("mc_points")) cfg.mc_points = doc.at("mc_points").get<std::size_t>();
    if (doc.contains("gh_nodes")) cfg.gh_nodes = doc.at("gh_nodes").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed sweep config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json sweep_config_to_json(const SweepConfig& cfg) {
  std::vector<std::string> methods;
  for (auto m : cfg.methods) methods.emplace_back(to_string(m));
  return {{"dims", cfg.dims},          {"c", cfg.c},         {"weights", cfg.weights},
          {"n_trials", cfg.n_trials},  {"methods", methods}, {"seed", cfg.seed},
          {"mc_points", cfg.mc_points}, {"gh_nodes", cfg.gh_nodes}};
}

std::vector<SweepRecord> run_relative_error_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const CounterRng root(cfg.seed);
  const std::size_t n_methods = cfg.methods.size();
  std::vector<SweepRecord> records;
  for (int m : cfg.dims) {
    const CounterRng cell = root.split(static_cast<std::uint64_t>(m));
    // errors[trial * n_methods + method]
    std::vector<double> errors(cfg.n_trials * n_methods);
    parallel_for(cfg.n_trials, [&](std::size_t trial) {
      CounterRng rng = cell.split(trial);
      Eigen::VectorXd mu2(m);
      for (int i = 0; i < m; ++i) mu2[i] = 2.0 * cfg.c * rng.normal();
      const std::uint64_t mc_seed = rng();
      const GaussianMixture q = two_component(mu2, cfg.weights);
      const double truth = entropy_exact_k2(q, cfg.gh_nodes).value;
      for (std::size_t j = 0; j < n_methods; ++j) {
        const double approx = approximate(q, cfg.methods[j], cfg.mc_points, mc_seed);
        errors[trial * n_methods + j] = std::abs(truth - approx) / std::abs(truth);
      }
    });
    for (std::size_t j = 0; j < n_methods; ++j) {
      SweepRecord rec;
      rec.m = m;
      rec.method = cfg.methods[j];
      rec.n_trials = cfg.n_trials;
      rec.min_rel_err = std::numeric_limits<double>::infinity();
      double sum = 0.0;
      for (std::size_t t = 0; t < cfg.n_trials; ++t) {
        const double e = errors[t * n_methods + j];
        sum += e;
        rec.min_rel_err = std::min(rec.min_rel_err, e);
        rec.max_rel_err = std::max(rec.max_rel_err, e);
      }
      rec.mean_rel_err = sum / static_cast<double>(cfg.n_trials);
      records.push_back(rec);
    }
  }
  return records;
}

std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream out;
  out << "m,method,mean_rel_err,min_rel_err,max_rel_err,n_trials\n";
  for (const auto& r : records) {
    out << r.m << ',' << to_string(r.method) << ',' << format_double(r.mean_rel_err) << ','
        << format_double(r.min_rel_err) << ',' << format_double(r.max_rel_err) << ',' << r.n_trials << '\n';
  }
  return out.str();
}

std::string sweep_svg(const std::vector<SweepRecord>& records, const SweepConfig& cfg) {
  std::vector<PlotSeries> series;
  for (auto method : cfg.methods) {
    PlotSeries s;
    s.name = std::string(to_string(method));
    for (const auto& r : records) {
      if (r.method != method) continue;
      s.x.push_back(r.m);
      s.y.push_back(r.mean_rel_err);
    }
    series.push_back(std::move(s));
  }
  std::ostringstream title;
  title << "relative entropy error, c=" << cfg.c << ", pi=(" << cfg.weights[0] << "," << cfg.weights[1] << ")";
  return line_chart_svg(series, title.str(), "dimension m", "mean relative error");
}

ProbabilisticCheck run_probabilistic_check(int K, int m, double c, double eps, double s, std::size_t n_trials,
                                           std::uint64_t seed, std::array<double, 2> weights) {
  if (K != 2) throw UnsupportedConfiguration("probabilistic check needs K = 2 (Gauss-Hermite ground truth)");
  if (m < 1) throw UsageError("dimension must be positive");
  if (n_trials == 0) throw UsageError("probabilistic check needs at least one trial");
  ProbabilisticCheck out;
  out.rhs = probabilistic_bound_rhs(BoundVariant::Shared, K, m, c, s, eps);
  out.n_trials = n_trials;

  std::vector<char> exceeded(n_trials, 0);
  const CounterRng root(seed);
  parallel_for(n_trials, [&](std::size_t trial) {
    CounterRng rng = root.split(trial);
    // a = (μ₁ − μ₂)/2 ~ N(0, c² I) with μ₁ = 0.
    Eigen::VectorXd mu2(m);
    for (int i = 0; i < m; ++i) mu2[i] = -2.0 * c * rng.normal();
    const GaussianMixture q = two_component(mu2, weights);
    const double error = std::abs(entropy_exact_k2(q).value - entropy_ours(q).value);
    exceeded[trial] = error >= eps ? 1 : 0;
  });
  for (char e : exceeded) out.exceedances += static_cast<std::size_t>(e);
  const double n = static_cast<double>(n_trials);
  out.empirical_prob = static_cast<double>(out.exceedances) / n;
  out.binomial_sigma = std::sqrt(out.empirical_prob * (1.0 - out.empirical_prob) / n);
  return out;
}

}  // namespace gmentropy
