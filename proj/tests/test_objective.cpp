// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "fdfm/errors.hpp"
#include "fdfm/haar.hpp"
#include "fdfm/objective.hpp"
#include "test_util.hpp"

using namespace fdfm;
using namespace fdfm::testing;

TEST_SUITE("objective") {

TEST_CASE("perfect prediction has zero loss and zero gradient") {
  std::mt19937_64 rng(21);
  const FreqState v = random_state(rng, 2, 4, 4);
  for (auto norm : {BandNormalization::shared, BandNormalization::per_band}) {
    const auto loss = fa_loss(v, v, 0.3, {0.7}, norm);
    CHECK(loss.low_term == 0.0);
    CHECK(loss.high_term == 0.0);
    CHECK(loss.total == 0.0);
    CHECK(squared_norm(fa_loss_grad(v, v, 0.3, {0.7}, norm)) == 0.0);
  }
}

TEST_CASE("omega = 0 gives the plain MSE and matches cfm_loss") {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 20; ++i) {
    const Pixels a = random_pixels(rng, 2, 4, 6);
    const Pixels b = random_pixels(rng, 2, 4, 6);
    const auto loss = fa_loss(dwt2(a), dwt2(b), 0.1 * i / 2.0, {0.0});
    CHECK(loss.total == doctest::Approx(loss.low_term + loss.high_term));
    CHECK(std::abs(loss.total - cfm_loss(a, b)) <= 1e-10 * cfm_loss(a, b));
  }
  CHECK(cfm_loss(Pixels(1, 2, 2, 0.5), Pixels(1, 2, 2, 0.5)) == 0.0);
}

TEST_CASE("band-weighted loss equals the dense Mahalanobis form") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double t = i == 0 ? 0.2 : unif(rng);
    const double omega = i == 0 ? 0.7 : 1.8 * unif(rng) - 0.9;
    const auto lam = lambda_weights({omega}, t);
    const Dense m = band_operator(1, 4, 4, lam.low, lam.high);
    const Pixels a = random_pixels(rng, 1, 4, 4);
    const Pixels b = random_pixels(rng, 1, 4, 4);
    const auto v = to_vector(axpby(1.0, a, -1.0, b).values());
    const auto mv = m.apply(v);
    double quad = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) quad += v[k] * mv[k];
    quad /= static_cast<double>(v.size());
    const double fast = fa_loss(dwt2(a), dwt2(b), t, {omega}).total;
    CHECK(std::abs(fast - quad) <= 1e-10 * quad);
  }
}

TEST_CASE("per-band normalization divides each band by its own size") {
  FreqState a = FreqState::zeros(1, 2, 2), b = FreqState::zeros(1, 2, 2);
  a.low[0] = 1.0;
  for (double& v : a.high.values()) v = 2.0;
  const auto loss = fa_loss(a, b, 0.5, {0.0}, BandNormalization::per_band);
  CHECK(loss.low_term == doctest::Approx(1.0));
  CHECK(loss.high_term == doctest::Approx(4.0));
  const auto shared = fa_loss(a, b, 0.5, {0.0});
  CHECK(shared.low_term == doctest::Approx(0.25));
  CHECK(shared.high_term == doctest::Approx(3.0));
}

TEST_CASE("single-element band gradient is 2 delta") {
  FreqState a = FreqState::zeros(1, 2, 2), b = FreqState::zeros(1, 2, 2);
  a.low[0] = 0.125;
  // omega = 0 gives lambda = 1; cos(pi/2) = 0 would also do for any omega.
  const auto g = fa_loss_grad(a, b, 0.5, {0.0}, BandNormalization::per_band);
  CHECK(g.low[0] == doctest::Approx(0.25));
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(24);
  const double h = 1e-5;
  for (auto norm : {BandNormalization::shared, BandNormalization::per_band}) {
    const FreqState pred = random_state(rng, 1, 4, 4);
    const FreqState target = random_state(rng, 1, 4, 4);
    const FreqWeights w{0.6};
    const double t = 0.35;
    const auto grad = fa_loss_grad(pred, target, t, w, norm).flatten();
    auto flat = pred.flatten();
    for (std::size_t k = 0; k < flat.size(); ++k) {
      const double keep = flat[k];
      flat[k] = keep + h;
      const double up = fa_loss(FreqState::unflatten(flat, pred), target, t, w, norm).total;
      flat[k] = keep - h;
      const double down = fa_loss(FreqState::unflatten(flat, pred), target, t, w, norm).total;
      flat[k] = keep;
      const double fd = (up - down) / (2 * h);
      CHECK(std::abs(fd - grad[k]) <= 1e-6 * std::max(1.0, std::abs(grad[k])));
    }
  }
}

TEST_CASE("weights stay positive so the loss vanishes only at the target") {
  for (double omega : {-0.99, -0.5, 0.0, 0.5, 0.99}) {
    for (int i = 0; i <= 100; ++i) {
      const auto lam = lambda_weights({omega}, i / 100.0);
      CHECK(std::min(lam.low, lam.high) > 0.0);
    }
  }
}

TEST_CASE("constant-target regression is minimized by the sample mean") {
  std::mt19937_64 rng(25);
  std::normal_distribution<double> normal(0.3, 1.0);
  std::vector<double> y(500);
  double mean = 0.0;
  for (double& v : y) mean += (v = normal(rng)) / static_cast<double>(y.size());
  auto empirical = [&](double c) {
    double s = 0.0;
    for (double v : y) s += cfm_loss(Pixels(1, 2, 2, c), Pixels(1, 2, 2, v));
    return s;
  };
  CHECK(empirical(mean) < empirical(mean + 1e-3));
  CHECK(empirical(mean) < empirical(mean - 1e-3));
}

TEST_CASE("shape mismatch") {
  const FreqState a = FreqState::zeros(1, 2, 2), b = FreqState::zeros(1, 4, 4);
  CHECK_THROWS_AS(fa_loss(a, b, 0.5, {0.0}), DimensionError);
  CHECK_THROWS_AS(fa_loss_grad(a, b, 0.5, {0.0}), DimensionError);
  CHECK_THROWS_AS(cfm_loss(Pixels(1, 2, 2), Pixels(2, 2, 2)), DimensionError);
}

}  // TEST_SUITE
