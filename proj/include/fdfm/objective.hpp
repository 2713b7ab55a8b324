// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "fdfm/schedules.hpp"
#include "fdfm/tensor.hpp"

namespace fdfm {

/// How each band's squared error is averaged.
///  - shared:   both bands divide by the total coefficient count N = n_l + n_h.
///              The loss is then (1/N) v^T M(t) v, omega = 0 gives the plain
///              MSE, and it agrees with cfm_loss by Parseval.
///  - per_band: each band divides by its own count n_b.
enum class BandNormalization { shared, per_band };

struct LossBreakdown {
  double low_term = 0.0;
  double high_term = 0.0;
  double total = 0.0;
};

/// Frequency-aligned flow-matching loss for one sample:
///   low_term  = lambda_l(t) |v_pred.low  - v_target.low |^2 / n
///   high_term = lambda_h(t) |v_pred.high - v_target.high|^2 / n
LossBreakdown fa_loss(const FreqState& v_pred, const FreqState& v_target, double t,
                      const FreqWeights& weights,
                      BandNormalization norm = BandNormalization::shared);

/// Gradient of fa_loss(...).total with respect to v_pred:
///   (2 lambda_b(t) / n) (v_pred_b - v_target_b).
FreqState fa_loss_grad(const FreqState& v_pred, const FreqState& v_target, double t,
                       const FreqWeights& weights,
                       BandNormalization norm = BandNormalization::shared);

/// Homogeneous baseline: pixel-space mean squared error.
double cfm_loss(const Pixels& v_pred, const Pixels& v_target);

}  // namespace fdfm
