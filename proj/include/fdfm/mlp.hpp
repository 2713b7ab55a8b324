// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fdfm {

enum class Activation { tanh, identity };

/// Fully connected stack: hidden layers use `activation`, the last layer is
/// affine. Parameters live in one flat buffer laid out as
/// [W0 (out x in, row-major), b0, W1, b1, ...].
class MlpParams {
 public:
  MlpParams() = default;
  /// Zero-initialized network. `widths` = {input, hidden..., output}.
  explicit MlpParams(std::vector<std::size_t> widths, Activation activation = Activation::tanh);

  MlpParams(const MlpParams& other);
  MlpParams& operator=(const MlpParams& other);
  MlpParams(MlpParams&&) noexcept = default;
  MlpParams& operator=(MlpParams&&) noexcept = default;

  /// Glorot-uniform weights, zero biases. The output layer's weights are
  /// scaled by `output_gain`.
  static MlpParams glorot(std::vector<std::size_t> widths, std::mt19937_64& rng,
                          Activation activation = Activation::tanh, double output_gain = 1.0);

  const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  Activation activation() const noexcept { return activation_; }
  std::size_t layer_count() const noexcept { return widths_.empty() ? 0 : widths_.size() - 1; }
  std::size_t input_width() const noexcept { return widths_.empty() ? 0 : widths_.front(); }
  std::size_t output_width() const noexcept { return widths_.empty() ? 0 : widths_.back(); }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  std::span<const double> parameters() const noexcept { return params_; }
  /// Mutable access invalidates every tape recorded so far.
  std::span<double> mutable_parameters() noexcept {
    ++generation_;
    return params_;
  }

  std::size_t weight_offset(std::size_t layer) const { return weight_offsets_.at(layer); }
  std::size_t bias_offset(std::size_t layer) const { return bias_offsets_.at(layer); }

  std::span<const double> weights(std::size_t layer) const;
  std::span<const double> biases(std::size_t layer) const;
  std::span<double> mutable_weights(std::size_t layer);
  std::span<double> mutable_biases(std::size_t layer);

  std::uint64_t identity() const noexcept { return identity_; }
  std::uint64_t generation() const noexcept { return generation_; }

  friend bool operator==(const MlpParams& a, const MlpParams& b) {
    return a.widths_ == b.widths_ && a.activation_ == b.activation_ && a.params_ == b.params_;
  }

 private:
  std::vector<std::size_t> widths_;
  Activation activation_ = Activation::tanh;
  std::vector<double> params_;
  std::vector<std::size_t> weight_offsets_;
  std::vector<std::size_t> bias_offsets_;
  std::uint64_t identity_ = 0;
  std::uint64_t generation_ = 0;
};

/// Activations recorded by mlp_forward; layer_inputs[l] is the input to layer l.
struct MlpTape {
  std::uint64_t params_identity = 0;
  std::uint64_t params_generation = 0;
  std::vector<std::vector<double>> layer_inputs;
};

struct MlpForward {
  std::vector<double> output;
  MlpTape tape;
};

/// Throws DimensionError if `input` does not match the first layer.
MlpForward mlp_forward(const MlpParams& p, std::span<const double> input);

/// Output only, no tape.
std::vector<double> mlp_apply(const MlpParams& p, std::span<const double> input);

struct MlpGradients {
  std::vector<double> params;  // same layout as MlpParams::parameters()
  std::vector<double> input;
};

/// Reverse-mode pass. Throws ContractError when the tape was recorded on a
/// different parameter object or before the parameters were modified.
MlpGradients mlp_backward(const MlpParams& p, const MlpTape& tape,
                          std::span<const double> output_grad);

/// As above, but adds the parameter gradient into `param_grad` and returns
/// the input gradient.
std::vector<double> mlp_backward_accumulate(const MlpParams& p, const MlpTape& tape,
                                            std::span<const double> output_grad,
                                            std::span<double> param_grad);

}  // namespace fdfm
