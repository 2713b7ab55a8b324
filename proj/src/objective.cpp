// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/objective.hpp"

#include "fdfm/errors.hpp"
#include "fdfm/kernels.hpp"

namespace fdfm {

namespace {

struct Denominators {
  double low;
  double high;
};

Denominators denominators(const FreqState& s, BandNormalization norm) {
  if (norm == BandNormalization::per_band) {
    return {static_cast<double>(s.low.size()), static_cast<double>(s.high.size())};
  }
  const auto n = static_cast<double>(s.size());
  return {n, n};
}

}  // namespace

LossBreakdown fa_loss(const FreqState& v_pred, const FreqState& v_target, double t,
                      const FreqWeights& weights, BandNormalization norm) {
  require_same_shape(v_pred, v_target, "fa_loss");
  const auto lambda = lambda_weights(weights, t);
  const auto den = denominators(v_pred, norm);
  const auto& k = kernels::active();
  LossBreakdown out;
  out.low_term = lambda.low *
                 k.squared_distance(v_pred.low.data(), v_target.low.data(), v_pred.low.size()) /
                 den.low;
  out.high_term =
      lambda.high *
      k.squared_distance(v_pred.high.data(), v_target.high.data(), v_pred.high.size()) / den.high;
  out.total = out.low_term + out.high_term;
  return out;
}

FreqState fa_loss_grad(const FreqState& v_pred, const FreqState& v_target, double t,
                       const FreqWeights& weights, BandNormalization norm) {
  require_same_shape(v_pred, v_target, "fa_loss_grad");
  const auto lambda = lambda_weights(weights, t);
  const auto den = denominators(v_pred, norm);
  FreqState grad = FreqState::zeros_like(v_pred);
  const auto& k = kernels::active();
  k.scaled_diff(2.0 * lambda.low / den.low, v_pred.low.data(), v_target.low.data(),
                grad.low.data(), v_pred.low.size());
  k.scaled_diff(2.0 * lambda.high / den.high, v_pred.high.data(), v_target.high.data(),
                grad.high.data(), v_pred.high.size());
  return grad;
}

double cfm_loss(const Pixels& v_pred, const Pixels& v_target) {
  require_same_shape(v_pred, v_target, "cfm_loss");
  return kernels::active().squared_distance(v_pred.values().data(), v_target.values().data(),
                                            v_pred.size()) /
         static_cast<double>(v_pred.size());
}

}  // namespace fdfm
