// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "gmentropy/bnn.hpp"
#include "gmentropy/bounds.hpp"
#include "gmentropy/entropy.hpp"
#include "gmentropy/experiments.hpp"
#include "gmentropy/mixture.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace gmentropy;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok = true;
  std::string detail;
};

void note(const char* fmt, auto... args) {
  std::printf("  ");
  std::printf(fmt, args...);
  std::printf("\n");
}

bool run(int id, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o = body();
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool pass = o.ok && in_time;
  std::printf("criterion %d: %s (%s; %.1f s of %.0f s%s)\n", id, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
              budget_s, in_time ? "" : ", over budget");
  std::fflush(stdout);
  return pass;
}

struct Gen {
  std::mt19937_64 eng;
  explicit Gen(std::uint64_t seed) : eng(seed) {}
  double normal() { return std::normal_distribution<double>()(eng); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng); }
  Eigen::VectorXd vec(int m, double scale = 1.0) {
    return Eigen::VectorXd::NullaryExpr(m, [&] { return scale * normal(); });
  }
  Eigen::MatrixXd spd(int m) {
    const Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(m, m, [&] { return normal(); });
    return A * A.transpose() / m + uniform(0.2, 1.0) * Eigen::MatrixXd::Identity(m, m);
  }
  std::vector<double> weights(int K) {
    std::vector<double> w(static_cast<std::size_t>(K));
    double sum = 0;
    for (auto& v : w) sum += (v = uniform(0.2, 1.0));
    for (auto& v : w) v /= sum;
    double rest = 1.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) rest -= w[i];
    w.back() = rest;
    return w;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

GaussianMixture shared_mixture(const std::vector<double>& pi, const std::vector<Eigen::VectorXd>& mu,
                               const Covariance& cov) {
  std::vector<GaussianComponent> comps;
  for (std::size_t k = 0; k < pi.size(); ++k) comps.push_back({pi[k], mu[k], cov});
  return GaussianMixture(comps);
}

// Shared covariance, K = 2, μ₂ = μ₁ + 2Γa with |a| drawn uniformly from [0, a_max].
GaussianMixture random_k2_shared(Gen& g, int m, double a_max) {
  const Covariance cov = Covariance::full(g.spd(m));
  Eigen::VectorXd dir = g.vec(m);
  dir.normalize();
  const Eigen::VectorXd mu1 = g.vec(m);
  const Eigen::VectorXd mu2 = mu1 + 2.0 * g.uniform(0.0, a_max) * cov.color(dir);
  const double p = g.uniform(0.2, 0.8);
  return shared_mixture({p, 1.0 - p}, {mu1, mu2}, cov);
}

Outcome criterion1() {
  Gen g(101);
  double worst_exact = 0, worst_z = 0;
  for (int i = 0; i < 50; ++i) {
    const int m = 1 + i % 20;
    const Eigen::MatrixXd S = g.spd(m);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    long double log_det = 0;
    for (Eigen::Index j = 0; j < m; ++j) log_det += std::log(static_cast<long double>(ldlt.vectorD()(j)));
    const double analytic = static_cast<double>(oracle::gaussian_entropy(m, log_det));
    const GaussianMixture q({{1.0, g.vec(m), Covariance::full(S)}});
    worst_exact = std::max(worst_exact, std::abs(entropy_ours(q).value - analytic));
    const auto mc = entropy_mc(q, 100000, static_cast<std::uint64_t>(i));
    worst_z = std::max(worst_z, std::abs(mc.value - analytic) / *mc.std_error);
  }
  return {worst_exact <= 1e-12 && worst_z <= 3.0,
          fmt("max |ours - analytic| = %.2e, max MC z = %.2f", worst_exact, worst_z)};
}

Outcome criterion2() {
  Gen g(202);
  double worst_gh = 0, worst_red = 0;
  for (int i = 0; i < 20; ++i) {
    const GaussianMixture q = random_k2_shared(g, 1 + i % 10, 5.0);
    const double gh = entropy_exact_k2(q, 100).value;
    const auto mc = entropy_mc(q, 1000000, 1000 + static_cast<std::uint64_t>(i));
    worst_gh = std::max(worst_gh, std::abs(gh - mc.value) / *mc.std_error);
  }
  for (int i = 0; i < 10; ++i) {
    const int m = 2 + i % 4;
    const Covariance cov = Covariance::full(g.spd(m));
    const GaussianMixture q = shared_mixture(g.weights(3), {g.vec(m, 1.5), g.vec(m, 1.5), g.vec(m, 1.5)}, cov);
    const auto red = entropy_reduced_mc(q, 1000000, 2000 + static_cast<std::uint64_t>(i));
    const auto mc = entropy_mc(q, 1000000, 3000 + static_cast<std::uint64_t>(i));
    const double sigma = std::hypot(*red.std_error, *mc.std_error);
    worst_red = std::max(worst_red, std::abs(red.value - mc.value) / sigma);
  }
  return {worst_gh <= 3.0 && worst_red <= 3.0,
          fmt("max z GH vs MC = %.2f, max z reduced vs full MC = %.2f", worst_gh, worst_red)};
}

Outcome criterion3() {
  Gen g(303);
  int violations = 0, checks = 0;
  double tightest_upper = INFINITY;
  for (int i = 0; i < 100; ++i) {
    const int K = 2 + i % 2;
    const int m = 1 + (i / 2) % 5;
    const bool shared = (i / 10) % 2 == 0;
    const double spread = std::array{0.3, 1.0, 2.5}[static_cast<std::size_t>(i % 3)];
    std::vector<GaussianComponent> comps;
    const auto pi = g.weights(K);
    const Covariance common = Covariance::full(g.spd(m));
    for (int k = 0; k < K; ++k) {
      const Covariance cov = shared ? common
                             : (i % 4 == 1) ? Covariance::diagonal(g.vec(m).array().square() + 0.2)
                                            : Covariance::full(g.spd(m));
      comps.push_back({pi[static_cast<std::size_t>(k)], g.vec(m, spread), cov});
    }
    const GaussianMixture q(comps);
    double truth = 0, sigma = 0;
    if (shared && K == 2) {
      truth = entropy_exact_k2(q, 100).value;
    } else {
      const auto mc = entropy_mc(q, 1000000, 4000 + static_cast<std::uint64_t>(i));
      truth = mc.value;
      sigma = *mc.std_error;
    }
    const double err = std::abs(truth - entropy_ours(q).value);
    auto check = [&](const BoundReport& b) {
      ++checks;
      const bool below = b.lower - 3.0 * sigma - 3.0 * b.lower_std_error <= err;
      const bool above = err <= b.upper + 3.0 * sigma;
      if (!below || !above) {
        ++violations;
        note("violation: instance %d K=%d m=%d %s lower=%.6g err=%.6g upper=%.6g", i, K, m,
             std::string(to_string(b.variant)).c_str(), b.lower, err, b.upper);
      }
      tightest_upper = std::min(tightest_upper, b.upper / std::max(err, 1e-300));
    };
    for (auto kind : {AlphaKind::Pairwise, AlphaKind::SetBased}) {
      check(error_bounds_general(q, std::nullopt, kind, 100000, 5000 + static_cast<std::uint64_t>(i)));
      if (shared && m >= K - 1) check(error_bounds_shared(q, std::nullopt, kind));
    }
  }

  const Covariance id = Covariance::isotropic(3, 1.0);
  const GaussianMixture same = shared_mixture({0.5, 0.5}, {Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)}, id);
  const double err0 = std::abs(entropy_exact_k2(same).value - entropy_ours(same).value);
  const double lower_general = error_bounds_general(same, 0.5, AlphaKind::Pairwise, 1000, 0).lower;
  const double lower_shared = error_bounds_shared(same, 0.5).lower;
  const double half_log2 = 0.5 * std::numbers::ln2;
  const bool closed = std::abs(err0 - std::numbers::ln2) <= 1e-9 && std::abs(lower_general - half_log2) <= 1e-9 &&
                      std::abs(lower_shared - half_log2) <= 1e-9;
  return {violations == 0 && closed,
          fmt("%d violations in %d bound checks, min upper/err = %.3g; alpha=0 case err = %.10f lower = %.10f/%.10f",
              violations, checks, tightest_upper, err0, lower_general, lower_shared)};
}

Outcome criterion4() {
  Gen g(404);
  double worst_gap = INFINITY;
  for (int i = 0; i < 1000; ++i) {
    const int m = 2 + i % 5;
    const GaussianMixture q({{0.5, g.vec(m, 2.0), Covariance::full(g.spd(m))},
                             {0.5, g.vec(m, 2.0), Covariance::full(g.spd(m))}});
    const double pair = std::max(alpha_pair(q, 0, 1), alpha_pair(q, 1, 0));
    worst_gap = std::min(worst_gap, alpha_set(q, 0, 1) - pair);
  }
  double worst_c_z = INFINITY;
  for (int i = 0; i < 200; ++i) {
    const int m = 1 + i % 5;
    const GaussianMixture q({{0.5, g.vec(m, 2.0), Covariance::full(g.spd(m))},
                             {0.5, g.vec(m, 2.0), Covariance::full(g.spd(m))}});
    const auto a = c_coefficient(q, 0, 1, 100000, 2 * static_cast<std::uint64_t>(i));
    const auto b = c_coefficient(q, 1, 0, 100000, 2 * static_cast<std::uint64_t>(i) + 1);
    const double se = std::hypot(a.std_error, b.std_error);
    worst_c_z = std::min(worst_c_z, se > 0 ? (a.value + b.value) / se : (a.value + b.value > 0 ? INFINITY : 0));
  }
  bool exact_half = true;
  for (int i = 0; i < 20; ++i) {
    const int m = 1 + i % 6;
    const Covariance cov = Covariance::full(g.spd(m));
    const GaussianMixture q({{0.3, g.vec(m), cov}, {0.7, g.vec(m), cov}});
    const auto c = c_coefficient(q, 0, 1, 1000, 0);
    exact_half = exact_half && c.exact && c.value == 0.5 && c.std_error == 0.0;
  }
  return {worst_gap >= -1e-8 && worst_c_z > 3.0 && exact_half,
          fmt("min alpha_set - max alpha_pair = %.3g, min (c+c')/se = %.1f, equal-covariance c exact: %s", worst_gap,
              worst_c_z, exact_half ? "yes" : "no")};
}

constexpr double kFdStep = 1e-4;

double closed_form_gamma(const std::vector<double>& pi, const std::vector<Eigen::MatrixXd>& G) {
  const int m = static_cast<int>(G[0].rows());
  long double out = oracle::gaussian_entropy(m, 0.0L);
  for (std::size_t k = 0; k < pi.size(); ++k) {
    out += pi[k] * std::log(std::abs(G[k].determinant())) - pi[k] * std::log(pi[k]);
  }
  return static_cast<double>(out);
}

int tensor_nodes(int m) { return m == 1 ? 200 : m == 2 ? 60 : 30; }

Outcome criterion5() {
  Gen g(505);
  int violations = 0, checks = 0;
  double max_ratio = 0, worst_quad = 0;
  auto record = [&](double fd, double bound, const char* what, int inst) {
    ++checks;
    max_ratio = std::max(max_ratio, std::abs(fd) / bound);
    if (std::abs(fd) > bound) {
      ++violations;
      note("violation: instance %d %s |fd| = %.6g bound = %.6g", inst, what, std::abs(fd), bound);
    }
  };
  for (int i = 0; i < 50; ++i) {
    const int m = 1 + i % 3;
    const GaussianMixture q = random_k2_shared(g, m, 4.0);
    const Covariance& cov = q.component(0).cov;
    const std::vector<double> pi{q.component(0).weight, q.component(1).weight};
    const std::vector<Eigen::VectorXd> mu{q.component(0).mean, q.component(1).mean};
    const auto bounds = derivative_bounds(q, 0.5);
    auto error_at = [&](const std::vector<double>& p, const std::vector<Eigen::VectorXd>& mv) {
      const GaussianMixture r = shared_mixture(p, mv, cov);
      return entropy_exact_k2(r).value - entropy_ours(r).value;
    };

    for (int k = 0; k < 2; ++k) {
      for (int p = 0; p < m; ++p) {
        auto plus = mu, minus = mu;
        plus[static_cast<std::size_t>(k)](p) += kFdStep;
        minus[static_cast<std::size_t>(k)](p) -= kFdStep;
        record((error_at(pi, plus) - error_at(pi, minus)) / (2 * kFdStep), bounds.mu_bounds(k, p), "mu", i);
      }
    }

    const double d = (error_at({pi[0] + kFdStep, pi[1] - kFdStep}, mu) -
                      error_at({pi[0] - kFdStep, pi[1] + kFdStep}, mu)) / (2 * kFdStep);
    record(d, bounds.pi_bounds(0) + bounds.pi_bounds(1), "pi", i);

    const Eigen::MatrixXd gamma = cov.sqrt_factor();
    const int n = tensor_nodes(m);
    auto gamma_error = [&](const std::vector<Eigen::MatrixXd>& G) {
      return oracle::entropy_tensor(pi, mu, G, n) - closed_form_gamma(pi, G);
    };
    worst_quad = std::max(worst_quad, std::abs(gamma_error({gamma, gamma}) -
                                               (entropy_exact_k2(q).value - entropy_ours(q).value)));
    for (int k = 0; k < 2; ++k) {
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
          std::vector<Eigen::MatrixXd> plus{gamma, gamma}, minus{gamma, gamma};
          plus[static_cast<std::size_t>(k)](r, c) += kFdStep;
          minus[static_cast<std::size_t>(k)](r, c) -= kFdStep;
          record((gamma_error(plus) - gamma_error(minus)) / (2 * kFdStep),
                 bounds.gamma_bounds[static_cast<std::size_t>(k)](r, c), "gamma", i);
        }
      }
    }
  }
  return {violations == 0, fmt("%d violations in %d derivative checks, max |fd|/bound = %.3g, tensor vs GH %.1e",
                               violations, checks, max_ratio, worst_quad)};
}

double mean_error(const std::vector<SweepRecord>& recs, int m, SweepMethod method) {
  for (const auto& r : recs) {
    if (r.m == m && r.method == method) return r.mean_rel_err;
  }
  return NAN;
}

Outcome criterion6() {
  SweepConfig cfg;
  const auto base = run_relative_error_sweep(cfg);
  cfg.c = 0.05;
  const auto narrow = run_relative_error_sweep(cfg);

  const double ours200 = mean_error(base, 200, SweepMethod::Ours);
  bool a = true;
  std::string beaten;
  for (auto method : {SweepMethod::Huber2, SweepMethod::Huber0, SweepMethod::Bonilla, SweepMethod::MonteCarlo}) {
    const double other = mean_error(base, 200, method);
    note("m=200 %s mean relative error %.4g (ours %.4g)", std::string(to_string(method)).c_str(), other, ours200);
    if (!(ours200 < other)) {
      a = false;
      beaten += " " + std::string(to_string(method));
    }
  }
  const double ours1 = mean_error(base, 1, SweepMethod::Ours);
  const bool b = ours200 < ours1;
  int votes = 0;
  for (int m : cfg.dims) {
    if (mean_error(narrow, m, SweepMethod::Ours) >= mean_error(base, m, SweepMethod::Ours)) ++votes;
  }
  const bool c = 2 * votes > static_cast<int>(cfg.dims.size());
  return {a && b && c, fmt("(a) %s%s%s; (b) %s, ours m=1 %.4g vs m=200 %.4g; (c) %s, %d of %zu dims",
                           a ? "PASS" : "FAIL", a ? "" : ", not below:", beaten.c_str(), b ? "PASS" : "FAIL", ours1,
                           ours200, c ? "PASS" : "FAIL", votes, cfg.dims.size())};
}

Outcome criterion7() {
  const auto half = run_probabilistic_check(2, 200, 1.0, 0.5, 0.5, 500, 0);
  const auto over = run_probabilistic_check(2, 200, 1.0, 1.1, 0.5, 500, 0);
  const bool ok = half.empirical_prob <= half.rhs + 3.0 * half.binomial_sigma && over.exceedances == 0;
  return {ok, fmt("eps=0.5: %zu/%zu exceedances, rhs %.3g; eps=1.1: %zu exceedances", half.exceedances,
                  half.n_trials, half.rhs, over.exceedances)};
}

Outcome criterion8() {
  const MLPSpec tiny{1, 1, {2}};
  const Dataset tiny_data{{-1.0, 0.5}, {0.3, -0.2}, {1.4, 0.9}};
  double worst_grad = 0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    Gen g(800 + seed);
    VariationalPosterior q;
    const int m = tiny.weight_count();
    for (int k = 0; k < 2; ++k) {
      q.means.push_back(g.vec(m));
      q.rhos.push_back(g.vec(m, 0.5).array() - 1.0);
    }
    q.logits = g.vec(2);
    const Eigen::VectorXd eps = g.vec(m);
    const Prior prior{seed % 2 == 0 ? 1.0 : 1e6};
    const double sy = seed % 2 == 0 ? 0.5 : 1e-2;
    const auto grad = elbo_gradient(q, prior, tiny, tiny_data, tiny_data.size(), eps, sy);
    const Eigen::VectorXd theta = q.pack();
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      VariationalPosterior qp = q, qm = q;
      Eigen::VectorXd tp = theta, tm = theta;
      tp(i) += 1e-5;
      tm(i) -= 1e-5;
      qp.unpack(tp);
      qm.unpack(tm);
      const double fd = (elbo(qp, prior, tiny, tiny_data, tiny_data.size(), eps, sy) -
                         elbo(qm, prior, tiny, tiny_data, tiny_data.size(), eps, sy)) / 2e-5;
      worst_grad = std::max(worst_grad,
                            std::abs(fd - grad.grad(i)) / std::max({std::abs(fd), std::abs(grad.grad(i)), 1e-6}));
    }
  }

  const MLPSpec spec;
  TrainConfig cfg;
  const Dataset data = generate_dataset(20, 0.1, {-6.0, 6.0}, cfg.seed);
  const auto t0 = Clock::now();
  const auto result = train(spec, cfg, data);
  const double train_secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const auto smoothed = smooth(result.elbo_trace, 10);
  const bool rising = smoothed.back() > result.elbo_trace.front();

  std::vector<double> grid, train_x;
  for (int i = 0; i <= 240; ++i) grid.push_back(-6.0 + 0.05 * i);
  for (const auto& p : data) train_x.push_back(p.x);
  std::vector<double> off;
  for (double x : grid) {
    double nearest = INFINITY;
    for (double t : train_x) nearest = std::min(nearest, std::abs(x - t));
    if (nearest >= 0.5) off.push_back(x);
  }
  auto mean_std = [&](const std::vector<double>& xs) {
    double sum = 0;
    for (const auto& p : predict(result.posterior, spec, xs, 200, 0, cfg.likelihood_std)) sum += p.std;
    return sum / static_cast<double>(xs.size());
  };
  const double std_off = off.empty() ? NAN : mean_std(off);
  const double std_on = mean_std(train_x);
  const bool ok = worst_grad <= 1e-4 && train_secs < 60.0 && rising && std_off > std_on;
  return {ok, fmt("max relative gradient error %.2e; training %.2f s, elbo %.6g -> smoothed %.6g; mean std off-data "
                  "(%zu points) %.4g vs training inputs %.4g",
                  worst_grad, train_secs, result.elbo_trace.front(), smoothed.back(), off.size(), std_off, std_on)};
}

}  // namespace

int main() {
  int failed = 0;
  failed += !run(1, 10, criterion1);
  failed += !run(2, 60, criterion2);
  failed += !run(3, 300, criterion3);
  failed += !run(4, 120, criterion4);
  failed += !run(5, 120, criterion5);
  failed += !run(6, 300, criterion6);
  failed += !run(7, 120, criterion7);
  failed += !run(8, 60, criterion8);
  std::printf("%d of 8 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
