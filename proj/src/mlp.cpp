#include "gmentropy/mlp.hpp"

#include "gmentropy/errors.hpp"

#include <cmath>
#include <numbers>

namespace gmentropy {

namespace {

double erf_prime(double z) { return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-z * z); }

}  // namespace

void MLPSpec::validate() const {
  if (input_dim != 1 || output_dim != 1) throw UsageError("only scalar-in/scalar-out networks are supported");
  for (int h : hidden)
    if (h < 1) throw UsageError("hidden layer widths must be positive");
}

std::vector<MLPSpec::Layer> MLPSpec::layers() const {
  std::vector<Layer> out;
  int fan_in = input_dim;
  int offset = 0;
  auto push = [&](int fan_out) {
    out.push_back({fan_in, fan_out, offset});
    offset += (fan_in + 1) * fan_out;
    fan_in = fan_out;
  };
  for (int h : hidden) push(h);
  push(output_dim);
  return out;
}

int MLPSpec::weight_count() const {
  const auto ls = layers();
  return ls.back().offset + (ls.back().fan_in + 1) * ls.back().fan_out;
}

double MLPSpec::forward(std::span<const double> w, double x) const {
  if (static_cast<int>(w.size()) != weight_count()) throw UsageError("weight vector has the wrong length");
  std::vector<double> act{x};
  std::vector<double> next;
  const auto ls = layers();
  for (std::size_t l = 0; l < ls.size(); ++l) {
    const auto& L = ls[l];
    const bool last = l + 1 == ls.size();
    next.assign(static_cast<std::size_t>(L.fan_out), 0.0);
    const double* W = w.data() + L.offset;
    const double* b = W + L.fan_in * L.fan_out;
    for (int o = 0; o < L.fan_out; ++o) {
      double z = b[o];
      for (int i = 0; i < L.fan_in; ++i) z += W[o * L.fan_in + i] * act[static_cast<std::size_t>(i)];
      next[static_cast<std::size_t>(o)] = last ? z : std::erf(z);
    }
    act.swap(next);
  }
  return act[0];
}

double MLPSpec::forward_backward(std::span<const double> w, double x, double upstream,
                                 std::span<double> grad) const {
  const int n_w = weight_count();
  if (static_cast<int>(w.size()) != n_w || static_cast<int>(grad.size()) != n_w) {
    throw UsageError("weight or gradient vector has the wrong length");
  }
  const auto ls = layers();
  // acts[l] is the input of layer l; pre[l] its pre-activation.
  std::vector<std::vector<double>> acts(ls.size() + 1);
  std::vector<std::vector<double>> pre(ls.size());
  acts[0] = {x};
  for (std::size_t l = 0; l < ls.size(); ++l) {
    const auto& L = ls[l];
    const bool last = l + 1 == ls.size();
    const double* W = w.data() + L.offset;
    const double* b = W + L.fan_in * L.fan_out;
    pre[l].assign(static_cast<std::size_t>(L.fan_out), 0.0);
    acts[l + 1].assign(static_cast<std::size_t>(L.fan_out), 0.0);
    for (int o = 0; o < L.fan_out; ++o) {
      double z = b[o];
      for (int i = 0; i < L.fan_in; ++i) z += W[o * L.fan_in + i] * acts[l][static_cast<std::size_t>(i)];
      pre[l][static_cast<std::size_t>(o)] = z;
      acts[l + 1][static_cast<std::size_t>(o)] = last ? z : std::erf(z);
    }
  }

  std::vector<double> delta{upstream};  // ∂(upstream·f)/∂(output of current layer)
  for (std::size_t l = ls.size(); l-- > 0;) {
    const auto& L = ls[l];
    const bool last = l + 1 == ls.size();
    std::vector<double> dz(static_cast<std::size_t>(L.fan_out));
    for (int o = 0; o < L.fan_out; ++o) {
      const auto os = static_cast<std::size_t>(o);
      dz[os] = last ? delta[os] : delta[os] * erf_prime(pre[l][os]);
    }
    const double* W = w.data() + L.offset;
    double* gW = grad.data() + L.offset;
    double* gb = gW + L.fan_in * L.fan_out;
    std::vector<double> prev(static_cast<std::size_t>(L.fan_in), 0.0);
    for (int o = 0; o < L.fan_out; ++o) {
      const double d = dz[static_cast<std::size_t>(o)];
      gb[o] += d;
      for (int i = 0; i < L.fan_in; ++i) {
        gW[o * L.fan_in + i] += d * acts[l][static_cast<std::size_t>(i)];
        prev[static_cast<std::size_t>(i)] += d * W[o * L.fan_in + i];
      }
    }
    delta.swap(prev);
  }
  return acts.back()[0];
}

}  // namespace gmentropy
