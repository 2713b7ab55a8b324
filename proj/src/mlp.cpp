// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/mlp.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "fdfm/errors.hpp"
#include "fdfm/kernels.hpp"

namespace fdfm {

namespace {

std::uint64_t next_identity() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace

MlpParams::MlpParams(std::vector<std::size_t> widths, Activation activation)
    : widths_(std::move(widths)), activation_(activation), identity_(next_identity()) {
  if (widths_.size() < 2) throw DimensionError("an MLP needs at least input and output widths");
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    if (widths_[l] == 0 || widths_[l + 1] == 0) throw DimensionError("MLP widths must be >= 1");
    weight_offsets_.push_back(offset);
    offset += widths_[l] * widths_[l + 1];
    bias_offsets_.push_back(offset);
    offset += widths_[l + 1];
  }
  params_.assign(offset, 0.0);
}

MlpParams::MlpParams(const MlpParams& other)
    : widths_(other.widths_),
      activation_(other.activation_),
      params_(other.params_),
      weight_offsets_(other.weight_offsets_),
      bias_offsets_(other.bias_offsets_),
      identity_(next_identity()) {}

MlpParams& MlpParams::operator=(const MlpParams& other) {
  if (this != &other) {
    widths_ = other.widths_;
    activation_ = other.activation_;
    params_ = other.params_;
    weight_offsets_ = other.weight_offsets_;
    bias_offsets_ = other.bias_offsets_;
    ++generation_;
  }
  return *this;
}

MlpParams MlpParams::glorot(std::vector<std::size_t> widths, std::mt19937_64& rng,
                            Activation activation, double output_gain) {
  MlpParams p(std::move(widths), activation);
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    const double fan_in = static_cast<double>(p.widths_[l]);
    const double fan_out = static_cast<double>(p.widths_[l + 1]);
    double limit = std::sqrt(6.0 / (fan_in + fan_out));
    if (l + 1 == p.layer_count()) limit *= output_gain;
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : p.mutable_weights(l)) w = dist(rng);
  }
  return p;
}

std::span<const double> MlpParams::weights(std::size_t layer) const {
  return std::span<const double>(params_).subspan(weight_offsets_.at(layer),
                                                  widths_[layer] * widths_[layer + 1]);
}

std::span<const double> MlpParams::biases(std::size_t layer) const {
  return std::span<const double>(params_).subspan(bias_offsets_.at(layer), widths_[layer + 1]);
}

std::span<double> MlpParams::mutable_weights(std::size_t layer) {
  ++generation_;
  return std::span<double>(params_).subspan(weight_offsets_.at(layer),
                                            widths_[layer] * widths_[layer + 1]);
}

std::span<double> MlpParams::mutable_biases(std::size_t layer) {
  ++generation_;
  return std::span<double>(params_).subspan(bias_offsets_.at(layer), widths_[layer + 1]);
}

namespace {

void check_input(const MlpParams& p, std::size_t width) {
  if (p.layer_count() == 0) throw DimensionError("MLP has no layers");
  if (width != p.input_width()) {
    throw DimensionError("MLP expects input width " + std::to_string(p.input_width()) + ", got " +
                         std::to_string(width));
  }
}

// y = W x + b, then the hidden activation unless this is the last layer.
std::vector<double> apply_layer(const MlpParams& p, std::size_t l, std::span<const double> x) {
  const auto& k = kernels::active();
  const std::size_t in = p.widths()[l], out = p.widths()[l + 1];
  const auto w = p.weights(l);
  const auto b = p.biases(l);
  std::vector<double> y(out);
  for (std::size_t i = 0; i < out; ++i) y[i] = b[i] + k.dot(w.data() + i * in, x.data(), in);
  if (l + 1 < p.layer_count() && p.activation() == Activation::tanh) {
    for (double& v : y) v = std::tanh(v);
  }
  return y;
}

}  // namespace

MlpForward mlp_forward(const MlpParams& p, std::span<const double> input) {
  check_input(p, input.size());
  MlpForward fwd;
  fwd.tape.params_identity = p.identity();
  fwd.tape.params_generation = p.generation();
  fwd.tape.layer_inputs.reserve(p.layer_count());
  fwd.tape.layer_inputs.emplace_back(input.begin(), input.end());
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    auto y = apply_layer(p, l, fwd.tape.layer_inputs.back());
    if (l + 1 < p.layer_count()) {
      fwd.tape.layer_inputs.push_back(std::move(y));
    } else {
      fwd.output = std::move(y);
    }
  }
  return fwd;
}

std::vector<double> mlp_apply(const MlpParams& p, std::span<const double> input) {
  check_input(p, input.size());
  std::vector<double> x(input.begin(), input.end());
  for (std::size_t l = 0; l < p.layer_count(); ++l) x = apply_layer(p, l, x);
  return x;
}

std::vector<double> mlp_backward_accumulate(const MlpParams& p, const MlpTape& tape,
                                            std::span<const double> output_grad,
                                            std::span<double> param_grad) {
  if (tape.params_identity != p.identity() || tape.params_generation != p.generation() ||
      tape.layer_inputs.size() != p.layer_count()) {
    throw ContractError("mlp_backward: tape does not belong to the current parameters");
  }
  if (output_grad.size() != p.output_width()) {
    throw DimensionError("mlp_backward: output gradient width " +
                         std::to_string(output_grad.size()) + ", expected " +
                         std::to_string(p.output_width()));
  }
  if (param_grad.size() != p.parameter_count()) {
    throw DimensionError("mlp_backward: parameter gradient buffer has wrong size");
  }
  const auto& k = kernels::active();
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  for (std::size_t l = p.layer_count(); l-- > 0;) {
    const std::size_t in = p.widths()[l], out = p.widths()[l + 1];
    const auto& x = tape.layer_inputs[l];
    double* gw = param_grad.data() + p.weight_offset(l);
    double* gb = param_grad.data() + p.bias_offset(l);
    const auto w = p.weights(l);
    std::vector<double> prev(in, 0.0);
    for (std::size_t i = 0; i < out; ++i) {
      k.axpy(delta[i], x.data(), gw + i * in, in);
      gb[i] += delta[i];
      k.axpy(delta[i], w.data() + i * in, prev.data(), in);
    }
    if (l > 0 && p.activation() == Activation::tanh) {
      // x is tanh(z) of the previous layer.
      for (std::size_t j = 0; j < in; ++j) prev[j] *= 1.0 - x[j] * x[j];
    }
    delta = std::move(prev);
  }
  return delta;
}

MlpGradients mlp_backward(const MlpParams& p, const MlpTape& tape,
                          std::span<const double> output_grad) {
  MlpGradients g;
  g.params.assign(p.parameter_count(), 0.0);
  g.input = mlp_backward_accumulate(p, tape, output_grad, g.params);
  return g;
}

}  // namespace fdfm
