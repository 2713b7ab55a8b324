// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "fdfm/errors.hpp"
#include "fdfm/haar.hpp"
#include "fdfm/oracle.hpp"
#include "fdfm/verify.hpp"
#include "test_util.hpp"

using namespace fdfm;
using namespace fdfm::testing;

namespace {

const HeteroSchedule kLinear = HeteroSchedule::linear();
const HeteroSchedule kHetero = HeteroSchedule::power(0.95, 1.05);

PointMixture symmetric_line() { return PointMixture({{-1.0}, {1.0}}, {0.5, 0.5}, {Band::low}); }

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("single atom posterior is the atom") {
  const PointMixture one({{0.3, -0.7}}, {1.0}, {Band::low, Band::high});
  for (double x : {-5.0, 0.0, 12.0}) {
    const std::vector<double> q{x, -x};
    const auto m = posterior_mean(one, q, 0.8, kHetero);
    CHECK(m[0] == 0.3);
    CHECK(m[1] == -0.7);
  }
}

TEST_CASE("single atom field under the linear schedule") {
  const PointMixture one({{0.9}}, {1.0}, {Band::low});
  for (double t : {0.0, 0.4, 0.95}) {
    for (double x : {-1.0, 0.2, 2.0}) {
      const std::vector<double> q{x};
      const double expected = 0.9 - (x - t * 0.9) / (1 - t);
      CHECK(marginal_velocity(one, q, t, kLinear)[0] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("point on the path of a single atom gives the conditional velocity") {
  const PointMixture one({{0.5}, }, {1.0}, {Band::high});
  const double eps = -1.3, t = 0.35;
  const auto sv = eval_schedule(kHetero, t);
  const std::vector<double> q{sv.high.g * 0.5 + (1 - sv.high.g) * eps};
  CHECK(marginal_velocity(one, q, t, kHetero)[0] ==
        doctest::Approx(sv.high.gdot * (0.5 - eps)).epsilon(1e-12));
}

TEST_CASE("symmetric mixture at the origin has zero posterior mean") {
  const std::vector<double> q{0.0};
  for (double t : {0.1, 0.5, 0.9}) CHECK(posterior_mean(symmetric_line(), q, t, kLinear)[0] == 0.0);
}

TEST_CASE("posterior weight ratio at t = 0.5, x_t = 0.3") {
  const std::vector<double> q{0.3};
  const auto w = posterior_weights(symmetric_line(), q, 0.5, kLinear);
  CHECK(w[1] / w[0] == doctest::Approx(std::exp(0.3 * 0.5 * 2 / 0.25)).epsilon(1e-12));
  CHECK(w[0] + w[1] == doctest::Approx(1.0));
}

TEST_CASE("log-domain weights survive tiny 1 - g") {
  const std::vector<double> q{0.9};
  const auto w = posterior_weights(symmetric_line(), q, 0.999999, kLinear);
  CHECK(std::isfinite(w[0]));
  CHECK(w[1] == doctest::Approx(1.0));
}

TEST_CASE("Monte-Carlo agrees with the closed form for a single atom") {
  const PointMixture one({{0.6}}, {1.0}, {Band::low});
  std::mt19937_64 rng(51);
  const std::vector<double> q{0.1};
  const auto est = mc_velocity(one, q, 0.4, kHetero, {200000, 0.02}, rng);
  const double exact = marginal_velocity(one, q, 0.4, kHetero)[0];
  // With one atom the field is linear in x_t, so the local-linear fit is exact
  // and its standard error collapses to rounding level.
  CHECK(std::abs(est.estimate[0] - exact) <= 3 * est.stderr_[0] + 1e-12);
}

TEST_CASE("heterogeneous two-point case within three standard errors") {
  const PointMixture mix({{-1.0}, {1.0}}, {0.4, 0.6}, {Band::high});
  std::mt19937_64 rng(52);
  std::vector<std::vector<double>> queries;
  for (int i = 0; i < 7; ++i) queries.push_back({-0.9 + 0.3 * i});
  const auto est = mc_velocity_grid(mix, queries, 0.5, kHetero, {400000, 0.03}, rng);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const double exact = marginal_velocity(mix, queries[i], 0.5, kHetero)[0];
    CHECK(std::abs(est[i].estimate[0] - exact) <= 3 * est[i].stderr_[0]);
  }
}

TEST_CASE("standard error shrinks like one over root draws") {
  const PointMixture mix = symmetric_line();
  const std::vector<double> q{0.2};
  std::mt19937_64 rng(53);
  const auto small = mc_velocity(mix, q, 0.5, kLinear, {10000, 0.05}, rng);
  const auto large = mc_velocity(mix, q, 0.5, kLinear, {1000000, 0.05}, rng);
  const double ratio = small.stderr_[0] / large.stderr_[0];
  CHECK(ratio > 7.0);
  CHECK(ratio < 14.0);
}

TEST_CASE("image mixtures use dwt2 coordinates") {
  const std::vector<Pixels> atoms{Pixels(1, 2, 2, -0.8), Pixels(1, 2, 2, 0.8)};
  const PointMixture mix = PointMixture::from_images(atoms, {0.3, 0.7});
  CHECK(mix.dimension() == 4);
  CHECK(mix.layout() == std::vector<Band>{Band::low, Band::high, Band::high, Band::high});
  CHECK(mix.points()[1][0] == doctest::Approx(1.6));
  CHECK(mix.image_shape() == Shape{1, 2, 2});

  const OraclePredictor oracle(mix, kHetero);
  FreqState s = FreqState::zeros(1, 2, 2);
  s.low[0] = 1.5;
  const FreqState clean = oracle.predict_clean(s, 0.99, std::nullopt);
  CHECK(clean.low[0] == doctest::Approx(1.6));
  CHECK(oracle.image_shape() == Shape{1, 2, 2});
}

TEST_CASE("atom sampling follows the weights") {
  const PointMixture mix({{0.0}, {1.0}, {2.0}}, {0.2, 0.3, 0.5}, {Band::low});
  std::mt19937_64 rng(54);
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 100000; ++i) ++counts[mix.sample_index(rng)];
  CHECK(counts[0] / 1e5 == doctest::Approx(0.2).epsilon(0.05));
  CHECK(counts[2] / 1e5 == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(PointMixture({}, {}, {Band::low}), ConfigError);
  CHECK_THROWS_AS(PointMixture({{1.0}}, {0.5}, {Band::low}), ConfigError);
  CHECK_THROWS_AS(PointMixture({{1.0}, {2.0}}, {1.5, -0.5}, {Band::low}), ConfigError);
  CHECK_THROWS_AS(PointMixture({{1.0}, {2.0, 3.0}}, {0.5, 0.5}, {Band::low}), DimensionError);
  CHECK_THROWS_AS(PointMixture({std::vector<double>(65, 0.0)}, {1.0},
                               std::vector<Band>(65, Band::low)),
                  DimensionError);
  const std::vector<double> q{0.0};
  CHECK_THROWS_AS(posterior_mean(symmetric_line(), q, 1.0, kLinear), SingularityError);
  CHECK_THROWS_AS(marginal_velocity(symmetric_line(), q, 1.0, kLinear), SingularityError);
  const std::vector<double> q2{0.0, 0.0};
  CHECK_THROWS_AS(posterior_mean(symmetric_line(), q2, 0.5, kLinear), DimensionError);
  std::mt19937_64 rng(55);
  CHECK_THROWS_AS(mc_velocity(symmetric_line(), q, 0.5, kLinear, {9999, 0.02}, rng), ConfigError);
  const std::vector<double> far{60.0};
  CHECK_THROWS_AS(mc_velocity(symmetric_line(), far, 0.5, kLinear, {10000, 0.02}, rng),
                  UndefinedEstimateError);
  CHECK_THROWS_AS(mc_velocity(symmetric_line(), q, 1.0, kLinear, {10000, 0.02}, rng),
                  SingularityError);
  const std::vector<Pixels> none;
  CHECK_THROWS_AS(PointMixture::from_images(none, {}), ConfigError);
  const PointMixture raw({{1.0}}, {1.0}, {Band::low});
  CHECK_THROWS_AS(OraclePredictor(raw, kLinear), ConfigError);
}

}  // TEST_SUITE
