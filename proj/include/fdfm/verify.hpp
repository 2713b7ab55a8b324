// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fdfm/oracle.hpp"
#include "fdfm/schedules.hpp"

// Self-contained invariant checks used by `fdfm verify` and the acceptance
// suite. Every check uses a fixed seed.

namespace fdfm::verify {

struct CheckResult {
  std::string module;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Deliberate fault for exercising the harness: the forward transform is
/// scaled by `dwt_scale` and the inverse by its reciprocal.
struct Faults {
  double dwt_scale = 1.0;
};

CheckResult dwt_roundtrip(const Faults& faults = {});
CheckResult parseval(const Faults& faults = {});
CheckResult schedule_contract();
CheckResult smoothness_bound();
CheckResult population_regression();
CheckResult weighting_invariance();
CheckResult oracle_monte_carlo();
CheckResult sampler_convergence();

/// The checks run by `fdfm verify`, in order.
std::vector<std::function<CheckResult()>> cli_checks(const Faults& faults);

// Pieces shared with the acceptance suite.

/// 1-D two-point mixture {-1, +1} with weights {0.4, 0.6}, driven by `band`.
PointMixture line_mixture(Band band = Band::low);

/// E[v | x_t in [lo, hi]] for a 1-D mixture at time t, by quadrature of
/// density times the closed-form velocity.
double cell_average_velocity(const PointMixture& mix, double lo, double hi, double t,
                             const HeteroSchedule& schedule);

struct SlopeFit {
  std::vector<std::size_t> steps;
  std::vector<double> errors;
  double slope = 0.0;
};

/// Terminal RMS error of the Euler sampler against a fine RK4 solution of the
/// same ODE on [0, t_end], with the posterior-mean predictor of a two-point
/// image mixture, for each step count.
SlopeFit euler_error_slope(const std::vector<std::size_t>& steps, double t_end,
                           std::size_t trajectories);

/// Largest deviation of a reinterp trajectory with a perfect predictor from
/// the noise/data path.
double reinterp_path_error(std::size_t steps);

}  // namespace fdfm::verify
