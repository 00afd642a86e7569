#include "doctest.h"

#include "gmentropy/gauss_hermite.hpp"

#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace gmentropy;

TEST_CASE("nodes and weights match Golub-Welsch") {
  for (int n : {1, 2, 5, 20, 60}) {
    const auto rule = gauss_hermite(static_cast<std::size_t>(n));
    const auto [t, w] = oracle::golub_welsch(n);
    REQUIRE(rule.nodes.size() == static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      CHECK(rule.nodes[static_cast<std::size_t>(i)] == doctest::Approx(t(i)).epsilon(1e-10));
      CHECK(std::abs(rule.weights[static_cast<std::size_t>(i)] - w(i)) < 1e-12);
    }
  }
}

TEST_CASE("rule integrates even moments exactly") {
  for (std::size_t n : {10u, 100u, 200u}) {
    const auto rule = gauss_hermite(n);
    double total = 0;
    for (double w : rule.weights) total += w;
    CHECK(total == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
    for (int k : {1, 2, 4}) {
      double moment = 0;
      for (std::size_t j = 0; j < n; ++j) moment += rule.weights[j] * std::pow(rule.nodes[j], 2 * k);
      CHECK(moment == doctest::Approx(std::tgamma(k + 0.5)).epsilon(1e-12));
    }
  }
}

TEST_CASE("nodes are ascending and symmetric") {
  const auto rule = gauss_hermite(101);
  for (std::size_t j = 1; j < rule.nodes.size(); ++j) CHECK(rule.nodes[j] > rule.nodes[j - 1]);
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    CHECK(std::abs(rule.nodes[j] + rule.nodes[rule.nodes.size() - 1 - j]) < 1e-12);
  }
  CHECK(std::abs(rule.nodes[50]) < 1e-14);
}
