// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fdfm/errors.hpp"

namespace fdfm {

void PowerSchedule::validate() const {
  if (!std::isfinite(gamma) || gamma <= 0.0) {
    throw ConfigError("schedule gamma must be positive, got " + std::to_string(gamma));
  }
  if (!std::isfinite(eps_smooth) || eps_smooth < 0.0) {
    throw ConfigError("eps_smooth must be >= 0, got " + std::to_string(eps_smooth));
  }
}

ScheduleValue eval_schedule(const PowerSchedule& s, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("schedule time must lie in [0, 1], got " + std::to_string(t));
  }
  s.validate();
  // Closed form collapses to g(t) = t; evaluating it would leave rounding
  // residue from (t + eps) - eps.
  if (s.gamma == 1.0) return {t, 1.0};

  const double eps = s.eps_smooth;
  const double base = std::pow(eps, s.gamma);
  const double denom = std::pow(1.0 + eps, s.gamma) - base;
  double g;
  if (t == 0.0) {
    g = 0.0;
  } else if (t == 1.0) {
    g = 1.0;
  } else {
    g = (std::pow(t + eps, s.gamma) - base) / denom;
  }
  const double gdot = s.gamma * std::pow(t + eps, s.gamma - 1.0) / denom;
  return {g, gdot};
}

BandScheduleValue eval_schedule(const HeteroSchedule& s, double t) {
  return {eval_schedule(s.low, t), eval_schedule(s.high, t)};
}

double derivative_bound(const HeteroSchedule& s, std::size_t grid_points) {
  if (grid_points < 2) throw ConfigError("derivative_bound needs at least 2 grid points");
  double bound = 0.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(grid_points - 1);
    const auto v = eval_schedule(s, t);
    bound = std::max({bound, std::abs(v.low.gdot), std::abs(v.high.gdot)});
  }
  return bound;
}

void FreqWeights::validate() const {
  if (!(std::abs(omega) < 1.0)) {
    throw ConfigError("omega must satisfy |omega| < 1 so both band weights stay positive, got " +
                      std::to_string(omega));
  }
}

LambdaPair lambda_weights(const FreqWeights& w, double t) {
  w.validate();
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("weight time must lie in [0, 1], got " + std::to_string(t));
  }
  const double c = w.omega * std::cos(std::numbers::pi * (1.0 - t));
  return {1.0 - c, 1.0 + c};
}

void TimeSampler::validate() const {
  if (!std::isfinite(mu)) throw ConfigError("time_mu must be finite");
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    throw ConfigError("time_sigma must be positive, got " + std::to_string(sigma));
  }
}

double TimeSampler::from_normal(double z) const {
  const double t = 1.0 / (1.0 + std::exp(-(mu + sigma * z)));
  // Keep the open interval even where the logistic saturates.
  constexpr double tiny = std::numeric_limits<double>::min();
  return std::clamp(t, tiny, std::nextafter(1.0, 0.0));
}

double TimeSampler::sample(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  return from_normal(normal(rng));
}

double timeshift(double t, double s) {
  if (!std::isfinite(s) || s < 1.0) {
    throw ConfigError("timeshift must be >= 1, got " + std::to_string(s));
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("timeshift input must lie in [0, 1], got " + std::to_string(t));
  }
  if (s == 1.0) return t;
  return s * t / (1.0 + (s - 1.0) * t);
}

}  // namespace fdfm
