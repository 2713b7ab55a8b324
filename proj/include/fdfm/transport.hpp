// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "fdfm/schedules.hpp"
#include "fdfm/tensor.hpp"

namespace fdfm {

/// Largest time at which x-prediction is converted to a velocity; beyond it
/// 1 - g_b(t) is too close to zero.
inline constexpr double kDefaultTMax = 1.0 - 1e-3;

/// One point on the heterogeneous path together with its conditional velocity.
struct TransportSample {
  double t = 0.0;
  FreqState state;            // (l_t, h_t)
  Pixels pixels;              // x_t = idwt2(l_t, h_t)
  FreqState target_velocity;  // (gdot_l (l - eps_l), gdot_h (h - eps_h))
};

/// Per band b: state_b = g_b(t) data_b + (1 - g_b(t)) noise_b and
/// target_b = gdot_b(t) (data_b - noise_b). Inputs are in wavelet coordinates.
TransportSample interpolate(const FreqState& data, const FreqState& noise, double t,
                            const HeteroSchedule& schedule);
/// Pixel-space convenience: transforms both inputs with dwt2 first.
TransportSample interpolate(const Pixels& data, const Pixels& noise, double t,
                            const HeteroSchedule& schedule);

/// Per-band factor gdot_b(t) / (1 - g_b(t)) of the x-prediction conversion.
/// Throws SingularityError for t > t_max.
LambdaPair velocity_factors(double t, const HeteroSchedule& schedule,
                            double t_max = kDefaultTMax);

/// v_b = gdot_b(t) / (1 - g_b(t)) * (xhat_b - state_b). G(t) is diagonal in the
/// wavelet basis, so this is the exact operator form. Throws SingularityError
/// for t > t_max.
FreqState xpred_to_velocity(const FreqState& xhat, const FreqState& state, double t,
                            const HeteroSchedule& schedule, double t_max = kDefaultTMax);

/// Per-band scaling: out_b = g_b(t) s_b.
FreqState scale_bands(const FreqState& s, double low_factor, double high_factor);

/// G(t) x = W^-1 diag(g_l I, g_h I) W x, applied bandwise without forming G.
Pixels apply_G(const Pixels& x, double t, const HeteroSchedule& schedule);

}  // namespace fdfm
