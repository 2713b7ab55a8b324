// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fdfm/predictor.hpp"
#include "fdfm/schedules.hpp"
#include "fdfm/tensor.hpp"
#include "fdfm/transport.hpp"

namespace fdfm {

enum class SamplerVariant {
  euler,          // x_next = x_t + dt v
  reinterp,       // recover noise, re-mix at t_next
  paper_literal,  // x_next = x_hat + dt v
};

std::string variant_name(SamplerVariant v);
/// Throws ConfigError on an unknown name.
SamplerVariant parse_variant(const std::string& name);

struct CfgInterval {
  double lo = 0.0;
  double hi = 1.0;
};

struct SampleConfig {
  HeteroSchedule schedule = HeteroSchedule::linear();
  std::size_t steps = 50;
  SamplerVariant variant = SamplerVariant::euler;
  double t_max = kDefaultTMax;
  double cfg_scale = 1.0;
  CfgInterval cfg_interval;
  double timeshift = 1.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError on steps == 0, cfg_scale < 1, a bad interval,
  /// timeshift < 1 or t_max outside (0, 1).
  void validate() const;
};

/// Guided combination, applied only for t inside [lo, hi].
Pixels cfg_velocity(const Pixels& v_cond, const Pixels& v_uncond, double scale, double t,
                    const CfgInterval& interval);
FreqState cfg_velocity(const FreqState& v_cond, const FreqState& v_uncond, double scale, double t,
                       const CfgInterval& interval);

/// Clean-state prediction with guidance. Guidance needs a label; with scale 1,
/// outside the interval or without a label this is the plain prediction.
FreqState guided_prediction(const CleanPredictor& predictor, const FreqState& x_t, double t,
                            const SampleConfig& config, const Label& label);

/// One step from t to t_next in wavelet coordinates. At t >= t_max the
/// prediction itself is returned. Throws DomainError unless
/// 0 <= t <= t_next <= 1; t_next == t is the identity.
FreqState step(const CleanPredictor& predictor, const FreqState& x_t, double t, double t_next,
               const SampleConfig& config, const Label& label);
Pixels step(const CleanPredictor& predictor, const Pixels& x_t, double t, double t_next,
            const SampleConfig& config, const Label& label);

/// Runs step() over consecutive grid points starting from x at grid.front().
FreqState integrate(const CleanPredictor& predictor, const FreqState& x, std::span<const double> grid,
                    const SampleConfig& config, const Label& label);

/// Uniform grid on [0, 1] with `steps` intervals, warped by timeshift.
std::vector<double> time_grid(std::size_t steps, double shift);

/// Standard normal noise image for element `index` under `seed`.
Pixels noise_image(const Shape& chw, std::uint64_t seed, std::size_t index);

/// Integrates from the noise of element i to t = 1 on time_grid(). The last
/// interval (ending at t = 1) returns the prediction directly. Elements are
/// independent and run in parallel.
std::vector<Pixels> sample(const CleanPredictor& predictor, std::size_t n,
                           const SampleConfig& config, const Label& label);

}  // namespace fdfm
