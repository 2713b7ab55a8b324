// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/sampler.hpp"

#include <cmath>
#include <string>

#include "fdfm/errors.hpp"
#include "fdfm/haar.hpp"
#include "fdfm/parallel.hpp"

namespace fdfm {

std::string variant_name(SamplerVariant v) {
  switch (v) {
    case SamplerVariant::euler: return "euler";
    case SamplerVariant::reinterp: return "reinterp";
    case SamplerVariant::paper_literal: return "paper_literal";
  }
  return "unknown";
}

SamplerVariant parse_variant(const std::string& name) {
  if (name == "euler") return SamplerVariant::euler;
  if (name == "reinterp") return SamplerVariant::reinterp;
  if (name == "paper_literal") return SamplerVariant::paper_literal;
  throw ConfigError("unknown sampler variant '" + name +
                    "' (expected euler, reinterp or paper_literal)");
}

void SampleConfig::validate() const {
  schedule.validate();
  if (steps == 0) throw ConfigError("sample steps must be >= 1");
  if (!(t_max > 0.0 && t_max < 1.0)) {
    throw ConfigError("t_max must lie in (0, 1), got " + std::to_string(t_max));
  }
  if (!(cfg_scale >= 1.0) || !std::isfinite(cfg_scale)) {
    throw ConfigError("cfg_scale must be >= 1, got " + std::to_string(cfg_scale));
  }
  if (!(cfg_interval.lo >= 0.0 && cfg_interval.hi <= 1.0 && cfg_interval.lo < cfg_interval.hi)) {
    throw ConfigError("cfg interval must satisfy 0 <= lo < hi <= 1");
  }
  if (!(timeshift >= 1.0) || !std::isfinite(timeshift)) {
    throw ConfigError("timeshift must be >= 1, got " + std::to_string(timeshift));
  }
}

namespace {

bool guidance_active(double scale, double t, const CfgInterval& interval) {
  return scale != 1.0 && t >= interval.lo && t <= interval.hi;
}

void combine(std::span<const double> cond, std::span<const double> uncond, double scale,
             std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = uncond[i] + scale * (cond[i] - uncond[i]);
  }
}

}  // namespace

Pixels cfg_velocity(const Pixels& v_cond, const Pixels& v_uncond, double scale, double t,
                    const CfgInterval& interval) {
  require_same_shape(v_cond, v_uncond, "cfg_velocity");
  if (!guidance_active(scale, t, interval)) return v_cond;
  Pixels out = v_cond;
  combine(v_cond.values(), v_uncond.values(), scale, out.values());
  return out;
}

FreqState cfg_velocity(const FreqState& v_cond, const FreqState& v_uncond, double scale, double t,
                       const CfgInterval& interval) {
  require_same_shape(v_cond, v_uncond, "cfg_velocity");
  if (!guidance_active(scale, t, interval)) return v_cond;
  FreqState out = v_cond;
  combine(v_cond.low.values(), v_uncond.low.values(), scale, out.low.values());
  combine(v_cond.high.values(), v_uncond.high.values(), scale, out.high.values());
  return out;
}

FreqState guided_prediction(const CleanPredictor& predictor, const FreqState& x_t, double t,
                            const SampleConfig& config, const Label& label) {
  FreqState cond = predictor.predict_clean(x_t, t, label);
  if (!label || !guidance_active(config.cfg_scale, t, config.cfg_interval)) return cond;
  // The x-to-velocity map is affine in x_hat with the same offset for both
  // branches, so guiding x_hat guides the velocity identically.
  const FreqState uncond = predictor.predict_clean(x_t, t, std::nullopt);
  return cfg_velocity(cond, uncond, config.cfg_scale, t, config.cfg_interval);
}

FreqState step(const CleanPredictor& predictor, const FreqState& x_t, double t, double t_next,
               const SampleConfig& config, const Label& label) {
  if (!(t >= 0.0 && t <= t_next && t_next <= 1.0)) {
    throw DomainError("sampler step needs 0 <= t <= t_next <= 1, got t = " + std::to_string(t) +
                      ", t_next = " + std::to_string(t_next));
  }
  if (t_next == t) return x_t;
  FreqState xhat = guided_prediction(predictor, x_t, t, config, label);
  if (t >= config.t_max) return xhat;
  const double dt = t_next - t;

  switch (config.variant) {
    case SamplerVariant::euler: {
      const FreqState v = xpred_to_velocity(xhat, x_t, t, config.schedule, config.t_max);
      return axpby(1.0, x_t, dt, v);
    }
    case SamplerVariant::paper_literal: {
      const FreqState v = xpred_to_velocity(xhat, x_t, t, config.schedule, config.t_max);
      return axpby(1.0, xhat, dt, v);
    }
    case SamplerVariant::reinterp: {
      const auto now = eval_schedule(config.schedule, t);
      const auto next = eval_schedule(config.schedule, t_next);
      auto remix = [](std::span<const double> x, std::span<double> xh, double g, double g_next) {
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double eps = (x[i] - g * xh[i]) / (1.0 - g);
          xh[i] = g_next * xh[i] + (1.0 - g_next) * eps;
        }
      };
      remix(x_t.low.values(), xhat.low.values(), now.low.g, next.low.g);
      remix(x_t.high.values(), xhat.high.values(), now.high.g, next.high.g);
      return xhat;
    }
  }
  throw ConfigError("unknown sampler variant");
}

Pixels step(const CleanPredictor& predictor, const Pixels& x_t, double t, double t_next,
            const SampleConfig& config, const Label& label) {
  return idwt2(step(predictor, dwt2(x_t), t, t_next, config, label));
}

FreqState integrate(const CleanPredictor& predictor, const FreqState& x,
                    std::span<const double> grid, const SampleConfig& config,
                    const Label& label) {
  FreqState state = x;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    state = step(predictor, state, grid[i], grid[i + 1], config, label);
  }
  return state;
}

std::vector<double> time_grid(std::size_t steps, double shift) {
  if (steps == 0) throw ConfigError("time grid needs at least one step");
  std::vector<double> grid(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    grid[i] = timeshift(static_cast<double>(i) / static_cast<double>(steps), shift);
  }
  grid.front() = 0.0;
  grid.back() = 1.0;
  return grid;
}

Pixels noise_image(const Shape& chw, std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  Pixels noise(chw.at(0), chw.at(1), chw.at(2));
  for (double& v : noise.values()) v = normal(rng);
  return noise;
}

std::vector<Pixels> sample(const CleanPredictor& predictor, std::size_t n,
                           const SampleConfig& config, const Label& label) {
  config.validate();
  const Shape chw = predictor.image_shape();
  const auto grid = time_grid(config.steps, config.timeshift);
  std::vector<Pixels> out(n);
  parallel_for(n, [&](std::size_t i) {
    FreqState x = dwt2(noise_image(chw, config.seed, i));
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      if (k + 2 == grid.size()) {
        x = guided_prediction(predictor, x, grid[k], config, label);
      } else {
        x = step(predictor, x, grid[k], grid[k + 1], config, label);
      }
    }
    out[i] = idwt2(x);
  });
  return out;
}

}  // namespace fdfm
