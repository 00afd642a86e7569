#include "gmentropy/bnn.hpp"

#include "gmentropy/entropy.hpp"
#include "gmentropy/errors.hpp"
#include "gmentropy/parallel.hpp"
#include "gmentropy/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace gmentropy {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log 2π
constexpr double kInitialSigma = 0.05;

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  return logits.array() - lse;
}

void check_inputs(const VariationalPosterior& q, const MLPSpec& spec, const Dataset& batch, std::size_t full_n,
                  const Eigen::Ref<const Eigen::VectorXd>& eps, double likelihood_std, const Prior& prior) {
  q.validate(spec);
  if (eps.size() != q.dim()) throw UsageError("noise vector length does not match the weight count");
  if (batch.empty()) throw UsageError("data batch is empty");
  if (full_n < batch.size()) throw UsageError("full_n must be at least the batch size");
  if (!(likelihood_std > 0)) throw UsageError("likelihood_std must be positive");
  if (!(prior.sigma_w > 0)) throw UsageError("prior sigma_w must be positive");
}

}  // namespace

Dataset generate_dataset(std::size_t n, double noise_std, std::pair<double, double> x_range, std::uint64_t seed) {
  if (n < 1) throw UsageError("dataset size must be at least 1");
  if (!(x_range.second > x_range.first)) throw UsageError("x_range must be a nonempty interval");
  if (!(noise_std >= 0)) throw UsageError("noise_std must be nonnegative");
  CounterRng rng(seed);
  CounterRng xs = rng.split(0);
  CounterRng noise = rng.split(1);
  Dataset out(n);
  for (auto& p : out) {
    p.x = x_range.first + (x_range.second - x_range.first) * xs.uniform();
    p.y = p.x * std::sin(p.x) + noise_std * noise.normal();
  }
  return out;
}

Eigen::VectorXd VariationalPosterior::weights() const { return log_softmax(logits).array().exp(); }

Eigen::VectorXd VariationalPosterior::sigma(Eigen::Index k) const {
  return rhos[static_cast<std::size_t>(k)].unaryExpr([](double r) { return softplus(r); });
}

VariationalPosterior VariationalPosterior::initialize(const MLPSpec& spec, std::size_t K, std::uint64_t seed) {
  spec.validate();
  if (K < 1) throw UsageError("number of components must be at least 1");
  const int m = spec.weight_count();
  const double rho0 = std::log(std::expm1(kInitialSigma));
  VariationalPosterior q;
  CounterRng root(seed);
  for (std::size_t k = 0; k < K; ++k) {
    CounterRng rng = root.split(k);
    Eigen::VectorXd mu(m);
    for (const auto& L : spec.layers()) {
      const double sd = 1.0 / std::sqrt(static_cast<double>(L.fan_in));
      const int count = (L.fan_in + 1) * L.fan_out;
      for (int i = 0; i < count; ++i) mu(L.offset + i) = sd * rng.normal();
    }
    q.means.push_back(std::move(mu));
    q.rhos.push_back(Eigen::VectorXd::Constant(m, rho0));
  }
  q.logits = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
  return q;
}

Eigen::VectorXd VariationalPosterior::pack() const {
  const Eigen::Index K = components(), m = dim();
  Eigen::VectorXd flat(parameter_count());
  for (Eigen::Index k = 0; k < K; ++k) {
    flat.segment(k * m, m) = means[static_cast<std::size_t>(k)];
    flat.segment((K + k) * m, m) = rhos[static_cast<std::size_t>(k)];
  }
  flat.tail(K) = logits;
  return flat;
}

void VariationalPosterior::unpack(const Eigen::Ref<const Eigen::VectorXd>& flat) {
  if (flat.size() != parameter_count()) throw UsageError("flat parameter vector has the wrong length");
  const Eigen::Index K = components(), m = dim();
  for (Eigen::Index k = 0; k < K; ++k) {
    means[static_cast<std::size_t>(k)] = flat.segment(k * m, m);
    rhos[static_cast<std::size_t>(k)] = flat.segment((K + k) * m, m);
  }
  logits = flat.tail(K);
}

GaussianMixture VariationalPosterior::to_mixture() const {
  const Eigen::VectorXd pi = weights();
  std::vector<GaussianComponent> comps;
  for (Eigen::Index k = 0; k < components(); ++k) {
    comps.push_back({pi(k), means[static_cast<std::size_t>(k)], Covariance::diagonal(sigma(k).array().square())});
  }
  return GaussianMixture(std::move(comps));
}

void VariationalPosterior::validate(const MLPSpec& spec) const {
  if (means.empty()) throw UsageError("posterior has no components");
  if (means.size() != rhos.size() || logits.size() != components()) {
    throw UsageError("posterior component arrays disagree in length");
  }
  for (std::size_t k = 0; k < means.size(); ++k) {
    if (means[k].size() != spec.weight_count() || rhos[k].size() != spec.weight_count()) {
      throw UsageError("posterior dimension does not match the network weight count");
    }
  }
}

std::string to_string(Optimizer o) { return o == Optimizer::Adam ? "adam" : "sgd"; }

Optimizer parse_optimizer(const std::string& s) {
  if (s == "adam") return Optimizer::Adam;
  if (s == "sgd") return Optimizer::Sgd;
  throw UsageError("unknown optimizer '" + s + "' (expected adam or sgd)");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw UsageError("learning rate must be positive");
  if (!(prior_std > 0)) throw UsageError("prior std must be positive");
  if (!(likelihood_std > 0)) throw UsageError("likelihood std must be positive");
  if (K < 1) throw UsageError("K must be at least 1");
}

ElboTerms elbo_terms(const VariationalPosterior& q, const Prior& prior, const MLPSpec& spec, const Dataset& batch,
                     std::size_t full_n, const Eigen::Ref<const Eigen::VectorXd>& eps, double likelihood_std) {
  check_inputs(q, spec, batch, full_n, eps, likelihood_std, prior);
  const Eigen::Index K = q.components();
  const double m = static_cast<double>(q.dim());
  const double scale = static_cast<double>(full_n) / static_cast<double>(batch.size());
  const double var_y = likelihood_std * likelihood_std;
  const double var_w = prior.sigma_w * prior.sigma_w;
  const Eigen::VectorXd log_pi = log_softmax(q.logits);

  ElboTerms t;
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& mu = q.means[static_cast<std::size_t>(k)];
    const Eigen::VectorXd sig = q.sigma(k);
    const Eigen::VectorXd w = sig.cwiseProduct(eps) + mu;
    double ll = 0.0;
    for (const auto& p : batch) {
      const double r = p.y - spec.forward({w.data(), static_cast<std::size_t>(w.size())}, p.x);
      ll += -0.5 * (kLog2Pi + std::log(var_y)) - r * r / (2.0 * var_y);
    }
    ll *= scale;
    const double cross =
        -0.5 * (m * kLog2Pi + m * std::log(var_w) + sig.squaredNorm() / var_w + mu.squaredNorm() / var_w);
    const double ent = 0.5 * m * (1.0 + kLog2Pi) + sig.array().log().sum();
    t.log_likelihood.push_back(ll);
    t.cross_entropy.push_back(cross);
    t.entropy.push_back(ent);
    t.value += std::exp(log_pi(k)) * (ll + cross + ent - log_pi(k));
  }
  return t;
}

double elbo(const VariationalPosterior& q, const Prior& prior, const MLPSpec& spec, const Dataset& batch,
            std::size_t full_n, const Eigen::Ref<const Eigen::VectorXd>& eps, double likelihood_std) {
  return elbo_terms(q, prior, spec, batch, full_n, eps, likelihood_std).value;
}

ElboGradient elbo_gradient(const VariationalPosterior& q, const Prior& prior, const MLPSpec& spec,
                           const Dataset& batch, std::size_t full_n, const Eigen::Ref<const Eigen::VectorXd>& eps,
                           double likelihood_std) {
  check_inputs(q, spec, batch, full_n, eps, likelihood_std, prior);
  const Eigen::Index K = q.components();
  const Eigen::Index m = q.dim();
  const double scale = static_cast<double>(full_n) / static_cast<double>(batch.size());
  const double var_y = likelihood_std * likelihood_std;
  const double var_w = prior.sigma_w * prior.sigma_w;
  const Eigen::VectorXd log_pi = log_softmax(q.logits);
  const Eigen::VectorXd pi = log_pi.array().exp();

  ElboGradient out;
  out.grad = Eigen::VectorXd::Zero(q.parameter_count());
  Eigen::VectorXd c(K);  // L̂_k − log π_k
  Eigen::VectorXd gw(m);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& mu = q.means[static_cast<std::size_t>(k)];
    const auto& rho = q.rhos[static_cast<std::size_t>(k)];
    const Eigen::VectorXd sig = q.sigma(k);
    const Eigen::VectorXd w = sig.cwiseProduct(eps) + mu;
    const std::span<const double> wspan{w.data(), static_cast<std::size_t>(m)};
    gw.setZero();
    double ll = 0.0;
    for (const auto& p : batch) {
      const double f = spec.forward(wspan, p.x);
      const double r = p.y - f;
      ll += -0.5 * (kLog2Pi + std::log(var_y)) - r * r / (2.0 * var_y);
      spec.forward_backward(wspan, p.x, scale * r / var_y, {gw.data(), static_cast<std::size_t>(m)});
    }
    ll *= scale;
    const double md = static_cast<double>(m);
    const double cross =
        -0.5 * (md * kLog2Pi + md * std::log(var_w) + sig.squaredNorm() / var_w + mu.squaredNorm() / var_w);
    const double ent = 0.5 * md * (1.0 + kLog2Pi) + sig.array().log().sum();
    c(k) = ll + cross + ent - log_pi(k);

    const Eigen::VectorXd d_mu = gw - mu / var_w;
    const Eigen::VectorXd d_sig =
        gw.cwiseProduct(eps) - sig / var_w + sig.cwiseInverse();
    const Eigen::VectorXd d_rho = d_sig.cwiseProduct(rho.unaryExpr([](double r) { return sigmoid(r); }));
    out.grad.segment(k * m, m) = pi(k) * d_mu;
    out.grad.segment((K + k) * m, m) = pi(k) * d_rho;
  }
  out.value = pi.dot(c);
  // the −log π_k term's own derivative sums to zero over the simplex
  out.grad.tail(K) = pi.cwiseProduct((c.array() - out.value).matrix());
  return out;
}

TrainResult train(const MLPSpec& spec, const TrainConfig& cfg, const Dataset& data) {
  spec.validate();
  cfg.validate();
  if (data.empty()) throw UsageError("training data is empty");
  if (cfg.batch_size != 0 && cfg.batch_size != data.size()) {
    throw UnsupportedConfiguration("only full-batch training is supported (batch_size 0 or the dataset size)");
  }
  CounterRng root(cfg.seed);
  TrainResult res{VariationalPosterior::initialize(spec, cfg.K, root.split(0)()), {}};
  const Prior prior{cfg.prior_std};
  const CounterRng noise_root = root.split(1);
  const Eigen::Index m = res.posterior.dim();

  Eigen::VectorXd theta = res.posterior.pack();
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(theta.size());
  constexpr double b1 = 0.9, b2 = 0.999, adam_eps = 1e-8;
  Eigen::VectorXd eps(m);

  for (std::size_t step = 0; step < cfg.epochs; ++step) {
    CounterRng rng = noise_root.split(step);
    for (Eigen::Index i = 0; i < m; ++i) eps(i) = rng.normal();
    const ElboGradient g =
        elbo_gradient(res.posterior, prior, spec, data, data.size(), eps, cfg.likelihood_std);
    if (!std::isfinite(g.value) || !g.grad.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite objective at step " << step << " (|mu| = ";
      double nm = 0, nr = 0;
      for (Eigen::Index k = 0; k < res.posterior.components(); ++k) {
        nm += res.posterior.means[static_cast<std::size_t>(k)].squaredNorm();
        nr += res.posterior.rhos[static_cast<std::size_t>(k)].squaredNorm();
      }
      msg << std::sqrt(nm) << ", |rho| = " << std::sqrt(nr) << ", |logits| = " << res.posterior.logits.norm()
          << ")";
      throw NumericalError(msg.str());
    }
    res.elbo_trace.push_back(g.value);
    if (cfg.optimizer == Optimizer::Adam) {
      const double t = static_cast<double>(step + 1);
      m1 = b1 * m1 + (1 - b1) * g.grad;
      m2 = b2 * m2 + (1 - b2) * g.grad.cwiseAbs2();
      const double c1 = 1 - std::pow(b1, t), c2 = 1 - std::pow(b2, t);
      theta.array() += cfg.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + adam_eps);
    } else {
      theta += cfg.learning_rate * g.grad;
    }
    if (!theta.allFinite()) {
      throw NumericalError("non-finite parameter after update at step " + std::to_string(step));
    }
    res.posterior.unpack(theta);
  }
  return res;
}

std::vector<double> smooth(const std::vector<double>& trace, std::size_t window) {
  if (window < 1) throw UsageError("smoothing window must be at least 1");
  std::vector<double> out(trace.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    acc += trace[i];
    if (i >= window) acc -= trace[i - window];
    out[i] = acc / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

std::vector<Prediction> predict(const VariationalPosterior& q, const MLPSpec& spec, const std::vector<double>& xs,
                                std::size_t n_samples_per_component, std::uint64_t seed, double likelihood_std) {
  q.validate(spec);
  if (n_samples_per_component < 1) throw UsageError("need at least one sample per component");
  if (!(likelihood_std >= 0)) throw UsageError("likelihood_std must be nonnegative");
  const Eigen::Index K = q.components();
  const Eigen::Index m = q.dim();
  const auto S = static_cast<Eigen::Index>(n_samples_per_component);
  const Eigen::VectorXd pi = q.weights();

  // One set of weight draws per component, shared by every grid point.
  std::vector<Eigen::MatrixXd> draws(static_cast<std::size_t>(K));
  CounterRng root(seed);
  for (Eigen::Index k = 0; k < K; ++k) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(k));
    const Eigen::VectorXd sig = q.sigma(k);
    auto& W = draws[static_cast<std::size_t>(k)];
    W.resize(m, S);
    for (Eigen::Index s = 0; s < S; ++s)
      for (Eigen::Index i = 0; i < m; ++i) W(i, s) = q.means[static_cast<std::size_t>(k)](i) + sig(i) * rng.normal();
  }

  std::vector<Prediction> out(xs.size());
  parallel_for(xs.size(), [&](std::size_t j) {
    const double x = xs[j];
    Prediction p;
    p.x = x;
    double second = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      const auto& W = draws[static_cast<std::size_t>(k)];
      double mean = 0.0, m2 = 0.0;
      for (Eigen::Index s = 0; s < S; ++s) {
        const double f = spec.forward({W.col(s).data(), static_cast<std::size_t>(m)}, x);
        const double d = f - mean;
        mean += d / static_cast<double>(s + 1);
        m2 += d * (f - mean);
      }
      const double var = m2 / static_cast<double>(S);
      p.mean += pi(k) * mean;
      second += pi(k) * (var + mean * mean);
      const auto& mu = q.means[static_cast<std::size_t>(k)];
      p.component_means.push_back(spec.forward({mu.data(), static_cast<std::size_t>(m)}, x));
    }
    const double var = std::max(second - p.mean * p.mean, 0.0) + likelihood_std * likelihood_std;
    p.std = std::sqrt(var);
    out[j] = std::move(p);
  });
  return out;
}

}  // namespace gmentropy
