// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <random>

namespace fdfm {

inline constexpr double kDefaultEpsSmooth = 0.01;

/// Smoothed power schedule
///   g(t) = ((t + eps)^gamma - eps^gamma) / ((1 + eps)^gamma - eps^gamma)
/// with g(0) = 0 and g(1) = 1. `eps_smooth` is the smoothing offset that keeps
/// the derivative finite at t = 0 when gamma < 1.
struct PowerSchedule {
  double gamma = 1.0;
  double eps_smooth = kDefaultEpsSmooth;

  /// Throws ConfigError unless gamma > 0 and eps_smooth >= 0 (both finite).
  void validate() const;
};

struct ScheduleValue {
  double g;
  double gdot;
};

/// Throws DomainError for t outside [0, 1]. gamma == 1 returns (t, 1) exactly.
ScheduleValue eval_schedule(const PowerSchedule& s, double t);

/// Per-band schedules for the low and high frequency sub-states.
struct HeteroSchedule {
  PowerSchedule low;
  PowerSchedule high;

  static HeteroSchedule linear() { return {{1.0, kDefaultEpsSmooth}, {1.0, kDefaultEpsSmooth}}; }
  static HeteroSchedule power(double gamma_low, double gamma_high,
                              double eps_smooth = kDefaultEpsSmooth) {
    return {{gamma_low, eps_smooth}, {gamma_high, eps_smooth}};
  }
  void validate() const {
    low.validate();
    high.validate();
  }
};

struct BandScheduleValue {
  ScheduleValue low;
  ScheduleValue high;
};

BandScheduleValue eval_schedule(const HeteroSchedule& s, double t);

/// L_g = max over a uniform grid on [0, 1] (endpoints included) of |gdot| for
/// both bands. For power schedules gdot is monotone, so the grid maximum is
/// the supremum.
double derivative_bound(const HeteroSchedule& s, std::size_t grid_points = 10001);

/// Time-dependent cosine loss weights
///   lambda_l(t) = 1 - omega cos(pi (1 - t)),  lambda_h(t) = 1 + omega cos(pi (1 - t)).
struct FreqWeights {
  double omega = 0.0;

  /// Throws ConfigError unless |omega| < 1, which keeps both weights positive.
  void validate() const;
};

struct LambdaPair {
  double low;
  double high;
};

LambdaPair lambda_weights(const FreqWeights& w, double t);

/// Logit-normal training-time sampler: t = sigmoid(mu + sigma z), z ~ N(0, 1).
struct TimeSampler {
  double mu = -0.8;
  double sigma = 0.8;

  void validate() const;
  /// Deterministic map from a standard normal draw; result lies in (0, 1).
  double from_normal(double z) const;
  double sample(std::mt19937_64& rng) const;
};

/// Rational time warp t' = s t / (1 + (s - 1) t). Fixes 0 and 1; s = 1 is the
/// identity. Throws ConfigError for s < 1 and DomainError for t outside [0, 1].
double timeshift(double t, double s);

}  // namespace fdfm
