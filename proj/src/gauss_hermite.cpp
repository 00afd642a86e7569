#include "gmentropy/gauss_hermite.hpp"

#include "gmentropy/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace gmentropy {

namespace {

constexpr double kNewtonTol = 1e-14;
constexpr int kNewtonMaxIter = 100;
constexpr std::size_t kMaxNodes = 600;

struct HermiteEval {
  double value;       // p̃_n(z)
  double derivative;  // √(2n)·p̃_{n-1}(z)
};

// Orthonormal Hermite polynomials p̃_j with weight e^{-z²}.
HermiteEval hermite(std::size_t n, double z) {
  const double pi_quarter = std::pow(std::numbers::pi, -0.25);
  double p1 = pi_quarter;
  double p2 = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double p3 = p2;
    p2 = p1;
    const double jd = static_cast<double>(j);
    p1 = z * std::sqrt(2.0 / jd) * p2 - std::sqrt((jd - 1.0) / jd) * p3;
  }
  return {p1, std::sqrt(2.0 * static_cast<double>(n)) * p2};
}

}  // namespace

GaussHermiteRule gauss_hermite(std::size_t n) {
  if (n == 0) throw UsageError("Gauss-Hermite rule needs at least one node");
  if (n > kMaxNodes) throw UsageError("Gauss-Hermite rule supports at most " + std::to_string(kMaxNodes) + " nodes");
  const double nd = static_cast<double>(n);
  const std::size_t half = (n + 1) / 2;
  // Roots lie below √(2n+1) and are at least π/√(2n+1) apart; scanning
  // downward in much smaller steps isolates each one by a sign change.
  const double scan = 0.02 * std::numbers::pi / std::sqrt(2.0 * nd + 1.0);
  std::vector<double> pos_nodes, pos_weights;
  double hi = std::sqrt(2.0 * nd + 1.0) + 0.5;
  double f_hi = hermite(n, hi).value;
  for (std::size_t i = 0; i < half; ++i) {
    double lo = hi;
    double f_lo = f_hi;
    if (n % 2 == 1 && i + 1 == half) {
      lo = 0.0;
      f_lo = 0.0;
    } else {
      do {
        hi = lo;
        f_hi = f_lo;
        lo = hi - scan;
        f_lo = hermite(n, lo).value;
      } while ((f_lo > 0) == (f_hi > 0) && f_lo != 0.0);
    }
    double z = f_lo == 0.0 ? lo : 0.5 * (lo + hi);
    double a = lo, b = hi, fa = f_lo;
    bool converged = f_lo == 0.0;
    for (int iter = 0; iter < kNewtonMaxIter && !converged; ++iter) {
      const HermiteEval h = hermite(n, z);
      if (h.value == 0.0) break;
      if ((h.value > 0) == (fa > 0)) {
        a = z;
        fa = h.value;
      } else {
        b = z;
      }
      double next = z - h.value / h.derivative;
      if (!(next > std::min(a, b) && next < std::max(a, b))) next = 0.5 * (a + b);
      const double step = std::abs(next - z);
      z = next;
      converged = step <= kNewtonTol * std::max(1.0, std::abs(z));
    }
    if (!converged && hermite(n, z).value != 0.0) {
      throw NumericalError("Gauss-Hermite Newton iteration failed for root " + std::to_string(i) + " of " +
                           std::to_string(n));
    }
    const double derivative = hermite(n, z).derivative;
    pos_nodes.push_back(z);
    pos_weights.push_back(2.0 / (derivative * derivative));
    hi = lo;
    f_hi = f_lo;
  }

  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < half; ++i) {
    rule.nodes[i] = -pos_nodes[i];
    rule.weights[i] = pos_weights[i];
    rule.nodes[n - 1 - i] = pos_nodes[i];
    rule.weights[n - 1 - i] = pos_weights[i];
  }
  return rule;
}

const GaussHermiteRule& cached_gauss_hermite(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, GaussHermiteRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_hermite(n)).first;
  return it->second;
}

}  // namespace gmentropy
