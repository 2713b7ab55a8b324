// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fdfm/errors.hpp"
#include "fdfm/haar.hpp"

namespace fdfm {

std::vector<Band> band_layout(const FreqState& s) {
  std::vector<Band> layout(s.low.size(), Band::low);
  layout.resize(s.size(), Band::high);
  return layout;
}

PointMixture::PointMixture(std::vector<std::vector<double>> points, std::vector<double> weights,
                           std::vector<Band> layout)
    : points_(std::move(points)), weights_(std::move(weights)), layout_(std::move(layout)) {
  if (points_.empty()) throw ConfigError("point mixture needs at least one atom");
  if (weights_.size() != points_.size()) {
    throw ConfigError("point mixture has " + std::to_string(points_.size()) + " atoms but " +
                      std::to_string(weights_.size()) + " weights");
  }
  if (layout_.empty() || layout_.size() > kMaxOracleDimension) {
    throw DimensionError("oracle dimension must lie in [1, " +
                         std::to_string(kMaxOracleDimension) + "]");
  }
  for (const auto& p : points_) {
    if (p.size() != layout_.size()) throw DimensionError("point mixture atoms have ragged sizes");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("mixture weights must be >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ConfigError("mixture weights must sum to 1, got " + std::to_string(total));
  }
  cumulative_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
}

PointMixture PointMixture::from_images(std::span<const Pixels> images,
                                       std::vector<double> weights) {
  if (images.empty()) throw ConfigError("point mixture needs at least one atom");
  std::vector<std::vector<double>> points;
  std::vector<Band> layout;
  for (const auto& img : images) {
    require_same_shape(img, images.front(), "PointMixture::from_images");
    const FreqState s = dwt2(img);
    if (layout.empty()) layout = band_layout(s);
    points.push_back(s.flatten());
  }
  PointMixture mix(std::move(points), std::move(weights), std::move(layout));
  mix.image_shape_ = images.front().shape();
  return mix;
}

std::size_t PointMixture::sample_index(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> uniform(0.0, cumulative_.back());
  const double u = uniform(rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative_.begin()), points_.size() - 1);
}

namespace {

struct CoordinateSchedule {
  std::vector<double> g;
  std::vector<double> one_minus_g;
  std::vector<double> gdot;
};

CoordinateSchedule coordinate_schedule(const std::vector<Band>& layout, double t,
                                       const HeteroSchedule& schedule) {
  if (!(t < 1.0)) {
    throw SingularityError("posterior covariance (I - G)(I - G)^T is singular at t = " +
                           std::to_string(t));
  }
  const auto v = eval_schedule(schedule, t);
  CoordinateSchedule c;
  for (Band b : layout) {
    const auto& s = b == Band::low ? v.low : v.high;
    c.g.push_back(s.g);
    c.one_minus_g.push_back(1.0 - s.g);
    c.gdot.push_back(s.gdot);
  }
  return c;
}

void check_query(const PointMixture& mix, std::span<const double> x_t) {
  if (x_t.size() != mix.dimension()) {
    throw DimensionError("query has dimension " + std::to_string(x_t.size()) + ", mixture has " +
                         std::to_string(mix.dimension()));
  }
}

std::vector<double> velocity_from_mean(const CoordinateSchedule& c, std::span<const double> mean,
                                       std::span<const double> x_t) {
  std::vector<double> v(mean.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double noise_mean = (x_t[k] - c.g[k] * mean[k]) / c.one_minus_g[k];
    v[k] = c.gdot[k] * (mean[k] - noise_mean);
  }
  return v;
}

}  // namespace

std::vector<double> posterior_weights(const PointMixture& mix, std::span<const double> x_t,
                                      double t, const HeteroSchedule& schedule) {
  check_query(mix, x_t);
  const auto c = coordinate_schedule(mix.layout(), t, schedule);
  std::vector<double> logw(mix.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < mix.size(); ++i) {
    if (mix.weights()[i] == 0.0) continue;
    double quad = 0.0;
    for (std::size_t k = 0; k < x_t.size(); ++k) {
      const double r = (x_t[k] - c.g[k] * mix.points()[i][k]) / c.one_minus_g[k];
      quad += r * r;
    }
    logw[i] = std::log(mix.weights()[i]) - 0.5 * quad;
  }
  const double peak = *std::max_element(logw.begin(), logw.end());
  std::vector<double> w(mix.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(logw[i] - peak);
    total += w[i];
  }
  for (double& wi : w) wi /= total;
  return w;
}

std::vector<double> posterior_mean(const PointMixture& mix, std::span<const double> x_t, double t,
                                   const HeteroSchedule& schedule) {
  const auto w = posterior_weights(mix, x_t, t, schedule);
  std::vector<double> mean(mix.dimension(), 0.0);
  for (std::size_t i = 0; i < mix.size(); ++i) {
    if (w[i] == 0.0) continue;
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += w[i] * mix.points()[i][k];
  }
  return mean;
}

std::vector<double> marginal_velocity(const PointMixture& mix, std::span<const double> x_t,
                                      double t, const HeteroSchedule& schedule) {
  const auto mean = posterior_mean(mix, x_t, t, schedule);
  return velocity_from_mean(coordinate_schedule(mix.layout(), t, schedule), mean, x_t);
}

namespace {

// Solves A x = b in place for a small dense system with partial pivoting.
// Returns false when A is numerically singular.
bool solve_small(std::vector<double> a, std::vector<double>& b, std::size_t n) {
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return false;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    if (std::abs(a[pivot * n + col]) <= 1e-13 * scale) return false;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
    b[r] = s / a[r * n + r];
  }
  return true;
}

struct Draws {
  std::size_t dim = 0;
  std::vector<double> state;     // x_t, row-major (draw, coordinate), sorted by coordinate 0
  std::vector<double> velocity;  // dx_t/dt
};

Draws simulate(const PointMixture& mix, double t, const HeteroSchedule& schedule,
               std::size_t draws, std::mt19937_64& rng) {
  const auto c = coordinate_schedule(mix.layout(), t, schedule);
  const std::size_t d = mix.dimension();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> state(draws * d), velocity(draws * d);
  for (std::size_t n = 0; n < draws; ++n) {
    const auto& x = mix.points()[mix.sample_index(rng)];
    for (std::size_t k = 0; k < d; ++k) {
      const double eps = normal(rng);
      state[n * d + k] = c.g[k] * x[k] + c.one_minus_g[k] * eps;
      velocity[n * d + k] = c.gdot[k] * (x[k] - eps);
    }
  }
  std::vector<std::size_t> order(draws);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return state[a * d] < state[b * d]; });
  Draws out;
  out.dim = d;
  out.state.resize(draws * d);
  out.velocity.resize(draws * d);
  for (std::size_t n = 0; n < draws; ++n) {
    std::copy_n(state.begin() + static_cast<std::ptrdiff_t>(order[n] * d), d,
                out.state.begin() + static_cast<std::ptrdiff_t>(n * d));
    std::copy_n(velocity.begin() + static_cast<std::ptrdiff_t>(order[n] * d), d,
                out.velocity.begin() + static_cast<std::ptrdiff_t>(n * d));
  }
  return out;
}

McEstimate estimate_at(const Draws& draws, std::span<const double> query, const McOptions& opt) {
  const std::size_t d = draws.dim;
  const std::size_t count = draws.state.size() / d;
  const double h = opt.bandwidth;
  const double reach = 5.0 * h;
  const bool linear = opt.estimator == KernelEstimator::local_linear;
  const std::size_t p = linear ? d + 1 : 1;

  // Window on the sorted first coordinate.
  std::size_t lo = 0, hi = count;
  {
    std::size_t a = 0, b = count;
    while (a < b) {
      const std::size_t mid = (a + b) / 2;
      if (draws.state[mid * d] < query[0] - reach) a = mid + 1; else b = mid;
    }
    lo = a;
    b = count;
    while (a < b) {
      const std::size_t mid = (a + b) / 2;
      if (draws.state[mid * d] <= query[0] + reach) a = mid + 1; else b = mid;
    }
    hi = a;
  }

  auto kernel = [&](std::size_t n, std::vector<double>& z) -> double {
    double r2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double u = draws.state[n * d + k] - query[k];
      if (std::abs(u) > reach) return 0.0;
      r2 += u * u;
      if (linear) z[k + 1] = u;
    }
    z[0] = 1.0;
    return std::exp(-0.5 * r2 / (h * h));
  };

  // Weighted normal equations: A = sum K z z^T, B = sum K z v^T.
  std::vector<double> a(p * p, 0.0), b(p * d, 0.0), z(p, 0.0);
  double sum_k = 0.0, sum_k2 = 0.0;
  for (std::size_t n = lo; n < hi; ++n) {
    const double w = kernel(n, z);
    if (w == 0.0) continue;
    sum_k += w;
    sum_k2 += w * w;
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < p; ++c) a[r * p + c] += w * z[r] * z[c];
      for (std::size_t k = 0; k < d; ++k) b[r * d + k] += w * z[r] * draws.velocity[n * d + k];
    }
  }
  if (sum_k == 0.0) {
    throw UndefinedEstimateError("no Monte-Carlo draws inside the kernel window; widen the "
                                 "bandwidth or add draws");
  }
  // beta[:, k] solves A beta = B[:, k]; u solves A u = e_0 (equivalent kernel).
  std::vector<double> beta(p * d);
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> rhs(p);
    for (std::size_t r = 0; r < p; ++r) rhs[r] = b[r * d + k];
    if (!solve_small(a, rhs, p)) {
      throw UndefinedEstimateError("kernel regression is degenerate at this query point");
    }
    for (std::size_t r = 0; r < p; ++r) beta[r * d + k] = rhs[r];
  }
  std::vector<double> u(p, 0.0);
  u[0] = 1.0;
  if (!solve_small(a, u, p)) {
    throw UndefinedEstimateError("kernel regression is degenerate at this query point");
  }

  McEstimate est;
  est.estimate.resize(d);
  for (std::size_t k = 0; k < d; ++k) est.estimate[k] = beta[k];
  est.effective_samples = sum_k * sum_k / sum_k2;
  std::vector<double> var(d, 0.0);
  for (std::size_t n = lo; n < hi; ++n) {
    const double w = kernel(n, z);
    if (w == 0.0) continue;
    double ell = 0.0;
    for (std::size_t r = 0; r < p; ++r) ell += u[r] * z[r];
    ell *= w;
    for (std::size_t k = 0; k < d; ++k) {
      double fitted = 0.0;
      for (std::size_t r = 0; r < p; ++r) fitted += beta[r * d + k] * z[r];
      const double resid = draws.velocity[n * d + k] - fitted;
      var[k] += ell * ell * resid * resid;
    }
  }
  est.stderr_.resize(d);
  for (std::size_t k = 0; k < d; ++k) est.stderr_[k] = std::sqrt(var[k]);
  return est;
}

void check_options(const McOptions& opt) {
  if (opt.draws < 10'000) {
    throw ConfigError("mc_velocity needs at least 10^4 draws, got " + std::to_string(opt.draws));
  }
  if (!(opt.bandwidth > 0.0) || !std::isfinite(opt.bandwidth)) {
    throw ConfigError("mc_velocity bandwidth must be positive");
  }
}

}  // namespace

std::vector<McEstimate> mc_velocity_grid(const PointMixture& mix,
                                         std::span<const std::vector<double>> queries, double t,
                                         const HeteroSchedule& schedule,
                                         const McOptions& options, std::mt19937_64& rng) {
  check_options(options);
  for (const auto& q : queries) check_query(mix, q);
  const Draws draws = simulate(mix, t, schedule, options.draws, rng);
  std::vector<McEstimate> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(estimate_at(draws, q, options));
  return out;
}

McEstimate mc_velocity(const PointMixture& mix, std::span<const double> query, double t,
                       const HeteroSchedule& schedule, const McOptions& options,
                       std::mt19937_64& rng) {
  const std::vector<std::vector<double>> queries{std::vector<double>(query.begin(), query.end())};
  return mc_velocity_grid(mix, queries, t, schedule, options, rng).front();
}

OraclePredictor::OraclePredictor(const PointMixture& mix, HeteroSchedule schedule)
    : mix_(&mix), schedule_(schedule) {
  if (!mix.image_shape()) {
    throw ConfigError("OraclePredictor needs a mixture built from images");
  }
}

FreqState OraclePredictor::predict_clean(const FreqState& state, double t,
                                         const Label& /*label*/) const {
  const auto flat = state.flatten();
  const auto mean = posterior_mean(*mix_, flat, t, schedule_);
  return FreqState::unflatten(mean, state);
}

}  // namespace fdfm
