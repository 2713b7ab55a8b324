// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/predictor.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fdfm/errors.hpp"
#include "fdfm/haar.hpp"

namespace fdfm {

std::array<double, kTimeEmbeddingWidth> time_embedding(double t) {
  const double angle = 2.0 * std::numbers::pi * t;
  return {t, std::sin(angle), std::cos(angle), t * t};
}

void ModelShape::validate() const {
  if (channels == 0 || height < 2 || width < 2 || height % 2 != 0 || width % 2 != 0) {
    throw DimensionError("model image shape " + shape_string({channels, height, width}) +
                         " needs C >= 1 and even H, W >= 2");
  }
}

FactorizedModel FactorizedModel::create(const ModelShape& shape,
                                        const std::vector<std::size_t>& hidden,
                                        std::mt19937_64& rng) {
  shape.validate();
  FactorizedModel m;
  m.shape = shape;
  auto widths = [&](std::size_t in, std::size_t out) {
    std::vector<std::size_t> w{in};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(out);
    return w;
  };
  m.structure = MlpParams::glorot(widths(m.structure_input_width(), shape.low_size()), rng);
  m.detail = MlpParams::glorot(widths(m.detail_input_width(), shape.high_size()), rng);
  return m;
}

std::size_t FactorizedModel::structure_input_width() const {
  return shape.low_size() + kTimeEmbeddingWidth + shape.condition_width();
}

std::size_t FactorizedModel::detail_input_width() const {
  return shape.high_size() + shape.low_size() + kTimeEmbeddingWidth + shape.condition_width();
}

void FactorizedModel::validate() const {
  shape.validate();
  if (structure.input_width() != structure_input_width() ||
      structure.output_width() != shape.low_size()) {
    throw DimensionError("structure net widths do not match the model shape");
  }
  if (detail.input_width() != detail_input_width() || detail.output_width() != shape.high_size()) {
    throw DimensionError("detail net widths do not match the model shape");
  }
}

namespace {

void append_condition(std::vector<double>& in, const ModelShape& shape, const Label& label) {
  if (shape.num_classes == 0) {
    if (label.has_value()) {
      throw ConfigError("unconditional model received class label " + std::to_string(*label));
    }
    return;
  }
  if (label.has_value() && *label >= shape.num_classes) {
    throw ConfigError("class label " + std::to_string(*label) + " out of range for " +
                      std::to_string(shape.num_classes) + " classes");
  }
  const std::size_t slot = label.value_or(shape.num_classes);
  for (std::size_t i = 0; i <= shape.num_classes; ++i) in.push_back(i == slot ? 1.0 : 0.0);
}

void append_time(std::vector<double>& in, double t) {
  const auto e = time_embedding(t);
  in.insert(in.end(), e.begin(), e.end());
}

Shape low_shape(const ModelShape& s) { return {s.channels, s.height / 2, s.width / 2}; }
Shape high_shape(const ModelShape& s) { return {3 * s.channels, s.height / 2, s.width / 2}; }

}  // namespace

std::vector<double> structure_input(const FactorizedModel& m, const Tensor& low_state, double t,
                                    const Label& label) {
  if (low_state.shape() != low_shape(m.shape)) {
    throw DimensionError("low band " + shape_string(low_state.shape()) + " does not match model " +
                         shape_string(low_shape(m.shape)));
  }
  std::vector<double> in(low_state.values().begin(), low_state.values().end());
  append_time(in, t);
  append_condition(in, m.shape, label);
  return in;
}

std::vector<double> detail_input(const FactorizedModel& m, const Tensor& high_state,
                                 const Tensor& l_hat, double t, const Label& label) {
  if (high_state.shape() != high_shape(m.shape)) {
    throw DimensionError("high band " + shape_string(high_state.shape()) +
                         " does not match model " + shape_string(high_shape(m.shape)));
  }
  if (l_hat.shape() != low_shape(m.shape)) {
    throw DimensionError("low-band condition has shape " + shape_string(l_hat.shape()));
  }
  std::vector<double> in(high_state.values().begin(), high_state.values().end());
  in.insert(in.end(), l_hat.values().begin(), l_hat.values().end());
  append_time(in, t);
  append_condition(in, m.shape, label);
  return in;
}

Tensor predict_low(const FactorizedModel& m, const Tensor& low_state, double t,
                   const Label& label, MlpTape* tape) {
  const auto in = structure_input(m, low_state, t, label);
  if (tape == nullptr) return Tensor(low_shape(m.shape), mlp_apply(m.structure, in));
  auto fwd = mlp_forward(m.structure, in);
  *tape = std::move(fwd.tape);
  return Tensor(low_shape(m.shape), std::move(fwd.output));
}

Tensor predict_high(const FactorizedModel& m, const Tensor& high_state, const Tensor& l_hat,
                    double t, const Label& label, MlpTape* tape) {
  const auto in = detail_input(m, high_state, l_hat, t, label);
  if (tape == nullptr) return Tensor(high_shape(m.shape), mlp_apply(m.detail, in));
  auto fwd = mlp_forward(m.detail, in);
  *tape = std::move(fwd.tape);
  return Tensor(high_shape(m.shape), std::move(fwd.output));
}

PredictorOutput predict(const FactorizedModel& m, const FreqState& state, double t,
                        const Label& label, PredictionTape* tape) {
  PredictorOutput out;
  out.l_hat = predict_low(m, state.low, t, label, tape ? &tape->structure : nullptr);
  out.h_hat = predict_high(m, state.high, out.l_hat, t, label, tape ? &tape->detail : nullptr);
  out.x_hat = idwt2(FreqState{out.l_hat, out.h_hat});
  return out;
}

ModelGradients ModelGradients::zeros_like(const FactorizedModel& m) {
  return {std::vector<double>(m.structure.parameter_count(), 0.0),
          std::vector<double>(m.detail.parameter_count(), 0.0)};
}

void backward(const FactorizedModel& m, const PredictionTape& tape, const Tensor& grad_l_hat,
              const Tensor& grad_h_hat, ModelGradients& grads) {
  // The detail net's input gradient includes a d/dl_hat block; it is
  // discarded here, which is the stop-gradient.
  mlp_backward_accumulate(m.detail, tape.detail, grad_h_hat.values(), grads.detail);
  mlp_backward_accumulate(m.structure, tape.structure, grad_l_hat.values(), grads.structure);
}

FreqState FactorizedPredictor::predict_clean(const FreqState& state, double t,
                                             const Label& label) const {
  const Tensor l_hat = predict_low(*model_, state.low, t, label);
  Tensor h_hat = predict_high(*model_, state.high, l_hat, t, label);
  return {l_hat, std::move(h_hat)};
}

Shape FactorizedPredictor::image_shape() const {
  return {model_->shape.channels, model_->shape.height, model_->shape.width};
}

}  // namespace fdfm
