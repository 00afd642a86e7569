#pragma once

#include <cstddef>
#include <vector>

namespace gmentropy {

/// Nodes and weights for ∫ e^{-t²} g(t) dt ≈ Σ_j w_j g(t_j).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point rule (1 ≤ n ≤ 600). Each root of H_n is bracketed by a sign
/// change and polished by safeguarded Newton iteration on the orthonormal
/// Hermite recurrence until the step falls below 1e-14.
GaussHermiteRule gauss_hermite(std::size_t n);

/// Same rule, computed once per n and kept for the life of the process.
const GaussHermiteRule& cached_gauss_hermite(std::size_t n);

}  // namespace gmentropy
