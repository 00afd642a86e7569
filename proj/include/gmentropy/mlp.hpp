#pragma once

#include <span>
#include <vector>

namespace gmentropy {

/// Fully connected scalar-in/scalar-out network with erf hidden activations
/// and a linear output. Weights are one flat vector: for every layer the
/// fan_out×fan_in matrix (row-major) followed by fan_out biases.
struct MLPSpec {
  int input_dim = 1;
  int output_dim = 1;
  std::vector<int> hidden{8, 8};

  struct Layer {
    int fan_in;
    int fan_out;
    int offset;  // first weight of this layer in the flat vector
  };

  std::vector<Layer> layers() const;

  /// Σ over layers of (fan_in + 1)·fan_out.
  int weight_count() const;

  double forward(std::span<const double> w, double x) const;

  /// Returns f(x; w) and adds upstream·∂f/∂w into grad.
  double forward_backward(std::span<const double> w, double x, double upstream, std::span<double> grad) const;

  void validate() const;
};

}  // namespace gmentropy
