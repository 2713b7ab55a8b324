// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "fdfm/errors.hpp"
#include "fdfm/haar.hpp"
#include "fdfm/sampler.hpp"
#include "fdfm/tabular.hpp"
#include "fdfm/transport.hpp"

namespace fdfm::verify {

namespace {

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

template <typename Body>
CheckResult timed(std::string module, std::string name, Body body) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult r{std::move(module), std::move(name), false, {}, 0.0};
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

Pixels random_image(std::mt19937_64& rng, std::size_t c, std::size_t h, std::size_t w) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Pixels x(c, h, w);
  for (double& v : x.values()) v = normal(rng);
  return x;
}

FreqState forward(const Pixels& x, const Faults& f) {
  FreqState s = dwt2(x);
  return f.dwt_scale == 1.0 ? s : scale_bands(s, f.dwt_scale, f.dwt_scale);
}

Pixels inverse(const FreqState& s, const Faults& f) {
  return idwt2(f.dwt_scale == 1.0 ? s : scale_bands(s, 1.0 / f.dwt_scale, 1.0 / f.dwt_scale));
}

constexpr std::size_t kTransformCases = 1024;

}  // namespace

CheckResult dwt_roundtrip(const Faults& faults) {
  return timed("haar", "dwt round-trip", [&](CheckResult& r) {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (std::size_t i = 0; i < kTransformCases; ++i) {
      const Pixels x = random_image(rng, 3, 8, 8);
      worst = std::max(worst, max_abs_diff(inverse(forward(x, faults), faults).values(), x.values()));
    }
    r.passed = worst <= 1e-12;
    r.detail = fmt("max abs error %.3g over %g inputs (limit 1e-12)", worst, kTransformCases);
  });
}

CheckResult parseval(const Faults& faults) {
  return timed("haar", "Parseval", [&](CheckResult& r) {
    std::mt19937_64 rng(102);
    double worst = 0.0;
    for (std::size_t i = 0; i < kTransformCases; ++i) {
      const Pixels x = random_image(rng, 3, 8, 8);
      const double ex = squared_norm(x.values());
      worst = std::max(worst, std::abs(squared_norm(forward(x, faults)) - ex) / ex);
    }
    r.passed = worst <= 1e-10;
    r.detail = fmt("max relative energy error %.3g over %g inputs (limit 1e-10)", worst,
                   kTransformCases);
  });
}

CheckResult schedule_contract() {
  return timed("schedules", "schedule contract", [](CheckResult& r) {
    constexpr std::size_t grid = 10000;
    constexpr double h = 1e-6;
    bool ok = true;
    double worst_fd = 0.0;
    double worst_linear = 0.0;
    for (double gamma : {0.9, 0.95, 1.0, 1.05, 1.1}) {
      const PowerSchedule s{gamma, kDefaultEpsSmooth};
      ok = ok && eval_schedule(s, 0.0).g == 0.0 && eval_schedule(s, 1.0).g == 1.0;
      double prev = eval_schedule(s, 0.0).g;
      for (std::size_t i = 1; i <= grid; ++i) {
        const double t = static_cast<double>(i) / grid;
        const auto v = eval_schedule(s, t);
        ok = ok && v.g > prev;
        prev = v.g;
        if (gamma == 1.0) worst_linear = std::max(worst_linear, std::abs(v.g - t));
        if (t >= h && t <= 1.0 - h && i % 10 == 0 && i < grid) {
          const double fd = (eval_schedule(s, t + h).g - eval_schedule(s, t - h).g) / (2.0 * h);
          worst_fd = std::max(worst_fd, std::abs(fd - v.gdot) / std::abs(v.gdot));
        }
      }
    }
    r.passed = ok && worst_linear <= std::numeric_limits<double>::epsilon() && worst_fd <= 1e-6;
    r.detail = std::string(ok ? "endpoints exact, strictly increasing" : "endpoint/monotonicity violated") +
               fmt("; gamma=1 max |g-t| %.3g; max relative derivative error %.3g (limit 1e-6)",
                   worst_linear, worst_fd);
  });
}

CheckResult smoothness_bound() {
  return timed("transport", "smoothness bound", [](CheckResult& r) {
    const auto sch = HeteroSchedule::power(0.95, 1.05, 0.01);
    const double lg = derivative_bound(sch);
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    double worst = 0.0;
    std::size_t violations = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
      Pixels x(3, 8, 8);
      for (double& v : x.values()) v = 2.0 * uniform(rng) - 1.0;
      const Pixels eps = random_image(rng, 3, 8, 8);
      const double t = uniform(rng);
      const auto path = interpolate(x, eps, t, sch);
      const double lhs = std::sqrt(squared_norm(path.target_velocity));
      const double rhs =
          lg * (std::sqrt(squared_norm(x.values())) + std::sqrt(squared_norm(eps.values())));
      worst = std::max(worst, lhs / rhs);
      if (lhs > rhs) ++violations;
    }
    r.passed = violations == 0;
    r.detail = fmt("L_g = %.6g; max |v|/(L_g(|x|+|eps|)) = %.4f; %g violations of 1000", lg, worst,
                   static_cast<double>(violations));
  });
}

PointMixture line_mixture(Band band) { return PointMixture({{-1.0}, {1.0}}, {0.4, 0.6}, {band}); }

double cell_average_velocity(const PointMixture& mix, double lo, double hi, double t,
                             const HeteroSchedule& schedule) {
  if (mix.dimension() != 1) throw DimensionError("cell_average_velocity needs a 1-D mixture");
  const auto v = eval_schedule(schedule, t);
  const double g = mix.layout()[0] == Band::low ? v.low.g : v.high.g;
  const double sd = 1.0 - g;
  auto density = [&](double x) {
    double p = 0.0;
    for (std::size_t i = 0; i < mix.size(); ++i) {
      const double z = (x - g * mix.points()[i][0]) / sd;
      p += mix.weights()[i] * std::exp(-0.5 * z * z);
    }
    return p;
  };
  constexpr std::size_t intervals = 400;  // Simpson, even
  const double step = (hi - lo) / intervals;
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k <= intervals; ++k) {
    const double x = lo + step * static_cast<double>(k);
    const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double p = density(x);
    const double q[1] = {x};
    num += w * p * marginal_velocity(mix, q, t, schedule)[0];
    den += w * p;
  }
  return num / den;
}

namespace {

struct LineDraw {
  double x_t;
  double velocity;
  double t;
};

LineDraw draw_line(const PointMixture& mix, const HeteroSchedule& sch, double t,
                   std::mt19937_64& rng, std::normal_distribution<double>& normal) {
  const auto v = eval_schedule(sch, t);
  const auto& s = mix.layout()[0] == Band::low ? v.low : v.high;
  const double x = mix.points()[mix.sample_index(rng)][0];
  const double eps = normal(rng);
  return {s.g * x + (1.0 - s.g) * eps, s.gdot * (x - eps), t};
}

}  // namespace

CheckResult population_regression() {
  return timed("oracle", "population regression", [](CheckResult& r) {
    const auto sch = HeteroSchedule::power(0.95, 1.05, 0.01);
    const PointMixture mix = line_mixture(Band::low);
    const double t = 0.5;
    const CellGrid grid = CellGrid::line(-1.8, 1.8, 180);
    std::vector<double> truth(grid.cell_count());
    for (std::size_t c = 0; c < truth.size(); ++c) {
      truth[c] = cell_average_velocity(mix, grid.cell_lower(c)[0], grid.cell_upper(c)[0], t, sch);
    }
    auto rms_error = [&](std::size_t n, std::uint64_t seed) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::vector<TabularSample> samples(n);
      for (auto& s : samples) {
        const LineDraw d = draw_line(mix, sch, t, rng, normal);
        s.input = {d.x_t, 0.0};
        s.target = d.velocity;
      }
      const TabularModel model = tabular_predictor_fit(grid, samples);
      double sum = 0.0;
      for (std::size_t c = 0; c < truth.size(); ++c) {
        if (!model.defined(c)) throw UndefinedEstimateError("empty regression cell");
        sum += (model.value[c] - truth[c]) * (model.value[c] - truth[c]);
      }
      return std::sqrt(sum / static_cast<double>(truth.size()));
    };
    const double e1 = rms_error(200'000, 104);
    const double e4 = rms_error(800'000, 105);
    r.passed = e4 <= 0.6 * e1;
    r.detail = fmt("RMS error %.4g at n, %.4g at 4n; ratio %.3f (limit 0.6)", e1, e4, e4 / e1);
  });
}

CheckResult weighting_invariance() {
  return timed("oracle", "weighting invariance", [](CheckResult& r) {
    const auto sch = HeteroSchedule::power(0.95, 1.05, 0.01);
    const PointMixture mix = line_mixture(Band::low);
    const double t_lo = 0.49, t_hi = 0.51;
    // 61 cells of width 0.05; every third is centred on a test point.
    const CellGrid grid = CellGrid::line(-1.525, 1.525, 61);
    std::vector<std::size_t> test_cells;
    std::vector<double> oracle;
    for (std::size_t c = 0; c < 61; c += 3) {
      test_cells.push_back(c);
      const double q[1] = {grid.cell_center(c)[0]};
      oracle.push_back(marginal_velocity(mix, q, 0.5, sch)[0]);
    }
    const std::vector<double> omegas{0.0, 0.5, 0.7};
    std::vector<std::vector<double>> fields;
    std::vector<double> to_oracle;
    for (std::size_t k = 0; k < omegas.size(); ++k) {
      const FreqWeights weights{omegas[k]};
      std::mt19937_64 rng(106 + k);
      std::uniform_real_distribution<double> uniform(t_lo, t_hi);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::vector<TabularSample> kept;
      for (std::size_t i = 0; i < 3'000'000; ++i) {
        const LineDraw d = draw_line(mix, sch, uniform(rng), rng, normal);
        const double q[1] = {d.x_t};
        const auto cell = grid.cell_of(q);
        if (!cell || *cell % 3 != 0) continue;
        kept.push_back({{d.x_t, 0.0}, d.velocity, lambda_weights(weights, d.t).low});
      }
      const TabularModel model = tabular_predictor_fit(grid, kept);
      std::vector<double> field;
      double sum = 0.0;
      for (std::size_t j = 0; j < test_cells.size(); ++j) {
        if (!model.defined(test_cells[j])) throw UndefinedEstimateError("empty test cell");
        field.push_back(model.value[test_cells[j]]);
        sum += (field.back() - oracle[j]) * (field.back() - oracle[j]);
      }
      to_oracle.push_back(std::sqrt(sum / static_cast<double>(field.size())));
      fields.push_back(std::move(field));
    }
    double pairwise = 0.0;
    for (std::size_t a = 0; a < fields.size(); ++a) {
      for (std::size_t b = a + 1; b < fields.size(); ++b) {
        double sum = 0.0;
        for (std::size_t j = 0; j < fields[a].size(); ++j) {
          sum += (fields[a][j] - fields[b][j]) * (fields[a][j] - fields[b][j]);
        }
        pairwise = std::max(pairwise, std::sqrt(sum / static_cast<double>(fields[a].size())));
      }
    }
    const double worst = *std::max_element(to_oracle.begin(), to_oracle.end());
    r.passed = worst <= 0.05 && pairwise <= 0.10;
    r.detail = fmt("RMS to oracle for omega 0/0.5/0.7: %.4f/%.4f/%.4f", to_oracle[0], to_oracle[1],
                   to_oracle[2]) +
               fmt("; max pairwise RMS %.4f (limits 0.05, 0.10)", pairwise);
  });
}

CheckResult oracle_monte_carlo() {
  return timed("oracle", "closed form vs Monte Carlo", [](CheckResult& r) {
    struct Case {
      PointMixture mix;
      HeteroSchedule sch;
      double t;
      std::vector<std::vector<double>> queries;
      double bandwidth;
    };
    std::vector<std::vector<double>> line_grid;
    for (int i = 0; i <= 20; ++i) line_grid.push_back({-1.5 + 0.15 * i});
    std::vector<std::vector<double>> plane_grid;
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) plane_grid.push_back({-1.0 + 0.5 * i, -1.0 + 0.5 * j});
    }
    const std::vector<Case> cases{
        {line_mixture(Band::low), HeteroSchedule::linear(), 0.5, line_grid, 0.02},
        {line_mixture(Band::high), HeteroSchedule::power(0.95, 1.05, 0.01), 0.5, line_grid, 0.02},
        {PointMixture({{-1.0, 0.5}, {1.0, -0.5}, {0.3, 1.0}}, {0.3, 0.5, 0.2},
                      {Band::low, Band::high}),
         HeteroSchedule::power(0.95, 1.05, 0.01), 0.6, plane_grid, 0.05},
    };
    std::mt19937_64 rng(107);
    double worst = 0.0;
    std::size_t points = 0;
    for (const auto& c : cases) {
      McOptions options;
      options.draws = 1'000'000;
      options.bandwidth = c.bandwidth;
      const auto est = mc_velocity_grid(c.mix, c.queries, c.t, c.sch, options, rng);
      for (std::size_t q = 0; q < c.queries.size(); ++q) {
        const auto exact = marginal_velocity(c.mix, c.queries[q], c.t, c.sch);
        for (std::size_t k = 0; k < exact.size(); ++k) {
          worst = std::max(worst, std::abs(est[q].estimate[k] - exact[k]) / est[q].stderr_[k]);
          ++points;
        }
      }
    }
    r.passed = worst <= 3.0;
    r.detail = fmt("max |closed - mc| / stderr = %.3f over %g components (limit 3)", worst,
                   static_cast<double>(points));
  });
}

namespace {

Pixels constant_image(double v) { return Pixels(1, 2, 2, v); }

}  // namespace

SlopeFit euler_error_slope(const std::vector<std::size_t>& steps, double t_end,
                           std::size_t trajectories) {
  const auto sch = HeteroSchedule::power(0.95, 1.05, 0.01);
  const std::vector<Pixels> atoms{constant_image(-0.8), constant_image(0.8)};
  const PointMixture mix = PointMixture::from_images(atoms, {0.3, 0.7});
  const OraclePredictor predictor(mix, sch);
  SampleConfig config;
  config.schedule = sch;
  config.variant = SamplerVariant::euler;

  auto velocity = [&](const FreqState& x, double t) {
    return xpred_to_velocity(predictor.predict_clean(x, t, std::nullopt), x, t, sch);
  };
  auto rk4 = [&](FreqState x, std::size_t n) {
    const double h = t_end / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = h * static_cast<double>(i);
      const FreqState k1 = velocity(x, t);
      const FreqState k2 = velocity(axpby(1.0, x, 0.5 * h, k1), t + 0.5 * h);
      const FreqState k3 = velocity(axpby(1.0, x, 0.5 * h, k2), t + 0.5 * h);
      const FreqState k4 = velocity(axpby(1.0, x, h, k3), t + h);
      FreqState sum = axpby(1.0, k1, 2.0, k2);
      sum = axpby(1.0, sum, 2.0, k3);
      sum = axpby(1.0, sum, 1.0, k4);
      x = axpby(1.0, x, h / 6.0, sum);
    }
    return x;
  };

  SlopeFit fit;
  fit.steps = steps;
  std::vector<FreqState> starts, references;
  for (std::size_t j = 0; j < trajectories; ++j) {
    starts.push_back(dwt2(noise_image({1, 2, 2}, 108, j)));
    references.push_back(rk4(starts.back(), 4000));
  }
  for (std::size_t n : steps) {
    std::vector<double> grid(n + 1);
    for (std::size_t i = 0; i <= n; ++i) grid[i] = t_end * static_cast<double>(i) / n;
    grid.back() = t_end;
    double sum = 0.0;
    for (std::size_t j = 0; j < trajectories; ++j) {
      const FreqState end = integrate(predictor, starts[j], grid, config, std::nullopt);
      sum += squared_norm(axpby(1.0, end, -1.0, references[j]));
    }
    fit.errors.push_back(std::sqrt(sum / static_cast<double>(trajectories)));
  }
  // Least-squares slope of log error against log steps.
  double mx = 0.0, my = 0.0;
  const double m = static_cast<double>(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    mx += std::log(static_cast<double>(steps[i])) / m;
    my += std::log(fit.errors[i]) / m;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double dx = std::log(static_cast<double>(steps[i])) - mx;
    sxy += dx * (std::log(fit.errors[i]) - my);
    sxx += dx * dx;
  }
  fit.slope = sxy / sxx;
  return fit;
}

double reinterp_path_error(std::size_t steps) {
  const auto sch = HeteroSchedule::power(0.95, 1.05, 0.01);
  Pixels x0(1, 4, 4);
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  for (double& v : x0.values()) v = uniform(rng);
  const std::vector<Pixels> atoms{x0};
  const PointMixture mix = PointMixture::from_images(atoms, {1.0});
  const OraclePredictor predictor(mix, sch);
  SampleConfig config;
  config.schedule = sch;
  config.variant = SamplerVariant::reinterp;

  const FreqState data = dwt2(x0);
  const FreqState noise = dwt2(noise_image({1, 4, 4}, 110, 0));
  const auto grid = time_grid(steps, 1.0);
  FreqState x = noise;
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    x = step(predictor, x, grid[i], grid[i + 1], config, std::nullopt);
    worst = std::max(worst, max_abs_diff(x, interpolate(data, noise, grid[i + 1], sch).state));
  }
  return worst;
}

CheckResult sampler_convergence() {
  return timed("sampler", "sampler convergence", [](CheckResult& r) {
    const SlopeFit fit = euler_error_slope({10, 30, 100, 300}, 0.9, 32);
    double reinterp = 0.0;
    for (std::size_t n : {1u, 7u, 50u}) reinterp = std::max(reinterp, reinterp_path_error(n));
    r.passed = std::abs(fit.slope + 1.0) <= 0.2 && reinterp <= 1e-10;
    r.detail = fmt("Euler log-log slope %.3f (target -1 +/- 0.2); errors %.3g at 10 steps", fit.slope,
                   fit.errors.front()) +
               fmt(", %.3g at 300 steps; reinterp path error %.3g (limit 1e-10)",
                   fit.errors.back(), reinterp);
  });
}

std::vector<std::function<CheckResult()>> cli_checks(const Faults& faults) {
  return {
      [faults] { return dwt_roundtrip(faults); },
      [faults] { return parseval(faults); },
      [] { return schedule_contract(); },
      [] { return smoothness_bound(); },
      [] { return weighting_invariance(); },
      [] { return sampler_convergence(); },
  };
}

}  // namespace fdfm::verify
