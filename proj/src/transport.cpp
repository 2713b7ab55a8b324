// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/transport.hpp"

#include <string>

#include "fdfm/errors.hpp"
#include "fdfm/haar.hpp"
#include "fdfm/kernels.hpp"

namespace fdfm {

TransportSample interpolate(const FreqState& data, const FreqState& noise, double t,
                            const HeteroSchedule& schedule) {
  require_same_shape(data, noise, "interpolate");
  const auto v = eval_schedule(schedule, t);
  const auto& k = kernels::active();

  TransportSample out;
  out.t = t;
  out.state = FreqState::zeros_like(data);
  out.target_velocity = FreqState::zeros_like(data);
  k.axpby(v.low.g, data.low.data(), 1.0 - v.low.g, noise.low.data(), out.state.low.data(),
          data.low.size());
  k.axpby(v.high.g, data.high.data(), 1.0 - v.high.g, noise.high.data(), out.state.high.data(),
          data.high.size());
  k.scaled_diff(v.low.gdot, data.low.data(), noise.low.data(), out.target_velocity.low.data(),
                data.low.size());
  k.scaled_diff(v.high.gdot, data.high.data(), noise.high.data(), out.target_velocity.high.data(),
                data.high.size());
  out.pixels = idwt2(out.state);
  return out;
}

TransportSample interpolate(const Pixels& data, const Pixels& noise, double t,
                            const HeteroSchedule& schedule) {
  require_same_shape(data, noise, "interpolate");
  return interpolate(dwt2(data), dwt2(noise), t, schedule);
}

LambdaPair velocity_factors(double t, const HeteroSchedule& schedule, double t_max) {
  if (t > t_max) {
    throw SingularityError("x-prediction to velocity conversion is singular near t = 1 (t = " +
                           std::to_string(t) + " > t_max = " + std::to_string(t_max) + ")");
  }
  const auto v = eval_schedule(schedule, t);
  return {v.low.gdot / (1.0 - v.low.g), v.high.gdot / (1.0 - v.high.g)};
}

FreqState xpred_to_velocity(const FreqState& xhat, const FreqState& state, double t,
                            const HeteroSchedule& schedule, double t_max) {
  require_same_shape(xhat, state, "xpred_to_velocity");
  const auto c = velocity_factors(t, schedule, t_max);
  FreqState out = FreqState::zeros_like(xhat);
  const auto& k = kernels::active();
  k.scaled_diff(c.low, xhat.low.data(), state.low.data(), out.low.data(), xhat.low.size());
  k.scaled_diff(c.high, xhat.high.data(), state.high.data(), out.high.data(), xhat.high.size());
  return out;
}

FreqState scale_bands(const FreqState& s, double low_factor, double high_factor) {
  FreqState out = s;
  for (double& v : out.low.values()) v *= low_factor;
  for (double& v : out.high.values()) v *= high_factor;
  return out;
}

Pixels apply_G(const Pixels& x, double t, const HeteroSchedule& schedule) {
  const auto v = eval_schedule(schedule, t);
  return idwt2(scale_bands(dwt2(x), v.low.g, v.high.g));
}

}  // namespace fdfm
