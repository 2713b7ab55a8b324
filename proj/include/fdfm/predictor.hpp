// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "fdfm/mlp.hpp"
#include "fdfm/tensor.hpp"

namespace fdfm {

/// Class label, or std::nullopt for the unconditional (null) branch.
using Label = std::optional<std::size_t>;

inline constexpr std::size_t kTimeEmbeddingWidth = 4;

/// (t, sin 2 pi t, cos 2 pi t, t^2)
std::array<double, kTimeEmbeddingWidth> time_embedding(double t);

/// Anything that predicts the clean state from a noisy one. The sampler only
/// sees this interface.
class CleanPredictor {
 public:
  virtual ~CleanPredictor() = default;
  virtual FreqState predict_clean(const FreqState& state, double t, const Label& label) const = 0;
  /// (C, H, W) of the images this predictor works on.
  virtual Shape image_shape() const = 0;
};

struct ModelShape {
  std::size_t channels = 1;
  std::size_t height = 2;
  std::size_t width = 2;
  std::size_t num_classes = 0;  // 0 means unconditional

  std::size_t low_size() const { return channels * (height / 2) * (width / 2); }
  std::size_t high_size() const { return 3 * low_size(); }
  /// One-hot width: num_classes real slots plus one null slot, or 0.
  std::size_t condition_width() const { return num_classes == 0 ? 0 : num_classes + 1; }
  void validate() const;
  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// Structure predictor followed by a detail refiner conditioned on its output:
///   l_hat = structure(l_t, t, c)
///   h_hat = detail(h_t, stop_gradient(l_hat), t, c)
///   x_hat = idwt2(l_hat, h_hat)
/// Conditioning is by input concatenation.
struct FactorizedModel {
  ModelShape shape;
  MlpParams structure;  // [l_t, time, condition] -> l_hat
  MlpParams detail;     // [h_t, l_hat, time, condition] -> h_hat

  static FactorizedModel create(const ModelShape& shape, const std::vector<std::size_t>& hidden,
                                std::mt19937_64& rng);
  /// Throws DimensionError if the network widths do not match `shape`.
  void validate() const;
  std::size_t structure_input_width() const;
  std::size_t detail_input_width() const;
};

struct PredictorOutput {
  Tensor l_hat;
  Tensor h_hat;
  Pixels x_hat;
};

struct PredictionTape {
  MlpTape structure;
  MlpTape detail;
};

std::vector<double> structure_input(const FactorizedModel& m, const Tensor& low_state, double t,
                                    const Label& label);
std::vector<double> detail_input(const FactorizedModel& m, const Tensor& high_state,
                                 const Tensor& l_hat, double t, const Label& label);

/// Structure branch only.
Tensor predict_low(const FactorizedModel& m, const Tensor& low_state, double t,
                   const Label& label, MlpTape* tape = nullptr);
/// Detail branch given an explicit low-band condition.
Tensor predict_high(const FactorizedModel& m, const Tensor& high_state, const Tensor& l_hat,
                    double t, const Label& label, MlpTape* tape = nullptr);

/// Full factorized prediction. Throws DimensionError on a state that does not
/// match the model shape.
PredictorOutput predict(const FactorizedModel& m, const FreqState& state, double t,
                        const Label& label, PredictionTape* tape = nullptr);

struct ModelGradients {
  std::vector<double> structure;
  std::vector<double> detail;

  static ModelGradients zeros_like(const FactorizedModel& m);
};

/// Accumulates parameter gradients given dL/dl_hat and dL/dh_hat. The detail
/// net's gradient with respect to its l_hat input is dropped (stop-gradient),
/// so the structure net only receives dL/dl_hat.
void backward(const FactorizedModel& m, const PredictionTape& tape, const Tensor& grad_l_hat,
              const Tensor& grad_h_hat, ModelGradients& grads);

/// CleanPredictor adapter over a model reference.
class FactorizedPredictor final : public CleanPredictor {
 public:
  explicit FactorizedPredictor(const FactorizedModel& model) : model_(&model) {}
  FreqState predict_clean(const FreqState& state, double t, const Label& label) const override;
  Shape image_shape() const override;

 private:
  const FactorizedModel* model_;
};

}  // namespace fdfm
