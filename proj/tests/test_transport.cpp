// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "fdfm/errors.hpp"
#include "fdfm/haar.hpp"
#include "fdfm/transport.hpp"
#include "test_util.hpp"

using namespace fdfm;
using namespace fdfm::testing;

namespace {

const HeteroSchedule kHetero = HeteroSchedule::power(0.95, 1.05);

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("endpoints reproduce noise and data") {
  std::mt19937_64 rng(11);
  const Pixels x = random_pixels(rng, 2, 4, 4);
  const Pixels e = random_pixels(rng, 2, 4, 4);
  const auto s0 = interpolate(x, e, 0.0, kHetero);
  const auto s1 = interpolate(x, e, 1.0, kHetero);
  CHECK(s0.state == dwt2(e));
  CHECK(s1.state == dwt2(x));
  CHECK(max_abs_diff(s0.pixels.values(), e.values()) <= 1e-15);
  CHECK(max_abs_diff(s1.pixels.values(), x.values()) <= 1e-15);
}

TEST_CASE("linear schedule is the straight path with constant velocity") {
  std::mt19937_64 rng(12);
  const Pixels x = random_pixels(rng, 1, 4, 6);
  const Pixels e = random_pixels(rng, 1, 4, 6);
  for (double t : {0.1, 0.5, 0.9}) {
    const auto s = interpolate(x, e, t, HeteroSchedule::linear());
    CHECK(max_abs_diff(s.pixels.values(), axpby(t, x, 1.0 - t, e).values()) <= 1e-12);
    CHECK(max_abs_diff(idwt2(s.target_velocity).values(), axpby(1.0, x, -1.0, e).values()) <=
          1e-12);
  }
}

TEST_CASE("low band is closer to data than high band at t = 0.5") {
  const auto v = eval_schedule(kHetero, 0.5);
  CHECK(v.low.g > v.high.g);
  FreqState data = FreqState::zeros(1, 2, 2), noise = FreqState::zeros(1, 2, 2);
  data.low[0] = 1.0;
  data.high[0] = 1.0;
  const auto s = interpolate(data, noise, 0.5, kHetero);
  CHECK(std::abs(s.state.low[0] - 1.0) < std::abs(s.state.high[0] - 1.0));
}

TEST_CASE("pixels and state stay consistent") {
  std::mt19937_64 rng(13);
  const auto s = interpolate(random_pixels(rng, 3, 8, 8), random_pixels(rng, 3, 8, 8), 0.37,
                             kHetero);
  CHECK(max_abs_diff(dwt2(s.pixels), s.state) <= 1e-12);
}

TEST_CASE("central differences of the path match the target velocity") {
  std::mt19937_64 rng(14);
  const double h = 1e-5;
  for (int i = 0; i < 20; ++i) {
    const Pixels x = random_pixels(rng, 1, 4, 4);
    const Pixels e = random_pixels(rng, 1, 4, 4);
    const double t = 0.05 + 0.9 * (i + 0.5) / 20.0;
    const auto plus = interpolate(x, e, t + h, kHetero).state.flatten();
    const auto minus = interpolate(x, e, t - h, kHetero).state.flatten();
    const auto target = interpolate(x, e, t, kHetero).target_velocity.flatten();
    double err = 0.0, ref = 0.0;
    for (std::size_t k = 0; k < target.size(); ++k) {
      err = std::max(err, std::abs((plus[k] - minus[k]) / (2 * h) - target[k]));
      ref = std::max(ref, std::abs(target[k]));
    }
    CHECK(err <= 1e-6 * ref);
  }
}

TEST_CASE("velocity norm obeys the derivative bound") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double lg = derivative_bound(kHetero);
  for (int i = 0; i < 1000; ++i) {
    const Pixels x = random_pixels(rng, 1, 4, 4, 2.0);
    const Pixels e = random_pixels(rng, 1, 4, 4);
    const auto s = interpolate(x, e, unif(rng), kHetero);
    const double v = std::sqrt(squared_norm(s.target_velocity));
    CHECK(v <= lg * (std::sqrt(squared_norm(x.values())) + std::sqrt(squared_norm(e.values()))));
  }
}

TEST_CASE("homogeneous conversion divides by 1 - t") {
  std::mt19937_64 rng(16);
  const FreqState xhat = random_state(rng, 1, 4, 4);
  const FreqState xt = random_state(rng, 1, 4, 4);
  const FreqState v = xpred_to_velocity(xhat, xt, 0.6, HeteroSchedule::linear());
  CHECK(max_abs_diff(v, axpby(1.0 / 0.4, xhat, -1.0 / 0.4, xt)) <= 1e-12);
}

TEST_CASE("true data as prediction gives the conditional velocity") {
  std::mt19937_64 rng(17);
  const Pixels x = random_pixels(rng, 2, 4, 4);
  const Pixels e = random_pixels(rng, 2, 4, 4);
  for (double t : {0.0, 0.3, 0.8, 0.99}) {
    const auto s = interpolate(x, e, t, kHetero);
    const FreqState v = xpred_to_velocity(dwt2(x), s.state, t, kHetero);
    CHECK(max_abs_diff(v, s.target_velocity) <= 1e-9);
  }
}

TEST_CASE("conversion matches the dense operator form") {
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> unif(0.0, 0.99);
  for (int i = 0; i < 100; ++i) {
    const double t = i == 0 ? 0.7 : unif(rng);
    const auto sv = eval_schedule(kHetero, t);
    const Dense gdot = band_operator(1, 4, 4, sv.low.gdot, sv.high.gdot);
    const Dense one_minus_g = band_operator(1, 4, 4, 1.0 - sv.low.g, 1.0 - sv.high.g);
    const Pixels xhat = random_pixels(rng, 1, 4, 4);
    const Pixels xt = random_pixels(rng, 1, 4, 4);
    const auto diff = to_vector(axpby(1.0, xhat, -1.0, xt).values());
    const auto dense = gdot.apply(solve(one_minus_g, diff));
    const Pixels fast = idwt2(xpred_to_velocity(dwt2(xhat), dwt2(xt), t, kHetero));
    CHECK(max_abs(dense, to_vector(fast.values())) <= 1e-10);
  }
}

TEST_CASE("conversion is singular past t_max") {
  const FreqState s = FreqState::zeros(1, 2, 2);
  CHECK_NOTHROW(xpred_to_velocity(s, s, kDefaultTMax, kHetero));
  CHECK_THROWS_AS(xpred_to_velocity(s, s, 0.9995, kHetero), SingularityError);
  CHECK_THROWS_AS(velocity_factors(1.0, kHetero), SingularityError);
  CHECK_THROWS_AS(xpred_to_velocity(s, FreqState::zeros(1, 4, 4), 0.5, kHetero), DimensionError);
}

TEST_CASE("apply_G endpoints, scalar collapse and dense form") {
  std::mt19937_64 rng(19);
  const Pixels x = random_pixels(rng, 1, 4, 4);
  CHECK(max_abs_diff(apply_G(x, 1.0, kHetero).values(), x.values()) <= 1e-15);
  const Pixels zero = apply_G(x, 0.0, kHetero);
  for (double v : zero.values()) CHECK(v == 0.0);
  const Pixels lin = apply_G(x, 0.3, HeteroSchedule::linear());
  CHECK(max_abs_diff(lin.values(), axpby(0.3, x, 0.0, x).values()) <= 1e-15);

  const auto sv = eval_schedule(kHetero, 0.42);
  const Dense g = band_operator(1, 4, 4, sv.low.g, sv.high.g);
  CHECK(max_abs(g.apply(to_vector(x.values())), to_vector(apply_G(x, 0.42, kHetero).values())) <=
        1e-12);
}

TEST_CASE("apply_G commutes with the transform") {
  std::mt19937_64 rng(20);
  for (int i = 0; i < 50; ++i) {
    const Pixels x = random_pixels(rng, 3, 4, 8);
    const double t = (i + 0.5) / 50.0;
    const auto sv = eval_schedule(kHetero, t);
    CHECK(max_abs_diff(dwt2(apply_G(x, t, kHetero)), scale_bands(dwt2(x), sv.low.g, sv.high.g)) <=
          1e-12);
  }
}

TEST_CASE("shape mismatch") {
  CHECK_THROWS_AS(interpolate(Pixels(1, 2, 2), Pixels(1, 4, 4), 0.5, kHetero), DimensionError);
}

}  // TEST_SUITE
