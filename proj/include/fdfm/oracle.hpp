// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "fdfm/predictor.hpp"
#include "fdfm/schedules.hpp"
#include "fdfm/tensor.hpp"

// Ground truth for point-mass data distributions. All vectors live in an
// orthonormal coordinate system where G(t) is diagonal; each coordinate is
// tagged with the band whose schedule drives it. For image mixtures those are
// the flattened dwt2 coefficients (low band first, then high band).

namespace fdfm {

enum class Band : std::uint8_t { low, high };

inline constexpr std::size_t kMaxOracleDimension = 64;

/// Band tag of every coordinate of FreqState::flatten() for a state like `s`.
std::vector<Band> band_layout(const FreqState& s);

class PointMixture {
 public:
  /// Throws ConfigError on empty, unnormalized or negative weights, and
  /// DimensionError on ragged points or dimension above kMaxOracleDimension.
  PointMixture(std::vector<std::vector<double>> points, std::vector<double> weights,
               std::vector<Band> layout);

  /// Atoms given as images; stored as flattened dwt2 coefficients.
  static PointMixture from_images(std::span<const Pixels> images, std::vector<double> weights);

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t dimension() const noexcept { return layout_.size(); }
  const std::vector<std::vector<double>>& points() const noexcept { return points_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<Band>& layout() const noexcept { return layout_; }
  /// (C, H, W) when built from images.
  const std::optional<Shape>& image_shape() const noexcept { return image_shape_; }

  std::size_t sample_index(std::mt19937_64& rng) const;

 private:
  std::vector<std::vector<double>> points_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  std::vector<Band> layout_;
  std::optional<Shape> image_shape_;
};

/// Posterior atom probabilities given x_t, computed in the log domain:
///   w_i ∝ pi_i exp(-1/2 sum_k ((x_t,k - g_k x_i,k) / (1 - g_k))^2).
/// Throws SingularityError for t >= 1.
std::vector<double> posterior_weights(const PointMixture& mix, std::span<const double> x_t,
                                      double t, const HeteroSchedule& schedule);

/// E[x | x_t].
std::vector<double> posterior_mean(const PointMixture& mix, std::span<const double> x_t, double t,
                                   const HeteroSchedule& schedule);

/// E[dx_t/dt | x_t] = Gdot (E[x | x_t] - E[eps | x_t]) with
/// E[eps | x_t] = (I - G)^-1 (x_t - G E[x | x_t]).
std::vector<double> marginal_velocity(const PointMixture& mix, std::span<const double> x_t,
                                      double t, const HeteroSchedule& schedule);

enum class KernelEstimator {
  nadaraya_watson,  // locally constant
  local_linear,     // locally linear; removes the first-order design bias
};

struct McOptions {
  std::size_t draws = 1'000'000;
  double bandwidth = 0.02;
  KernelEstimator estimator = KernelEstimator::local_linear;
};

struct McEstimate {
  std::vector<double> estimate;
  std::vector<double> stderr_;
  double effective_samples = 0.0;
};

/// Brute-force cross-check: simulate (x, eps) pairs, form (x_t, dx_t/dt), and
/// estimate E[dx_t/dt | x_t = query] with a Gaussian kernel of the given
/// bandwidth. Standard errors come from the sandwich variance of the linear
/// smoother. Throws ConfigError for draws < 10^4, SingularityError for t >= 1
/// and UndefinedEstimateError when no draw falls inside the kernel window.
McEstimate mc_velocity(const PointMixture& mix, std::span<const double> query, double t,
                       const HeteroSchedule& schedule, const McOptions& options,
                       std::mt19937_64& rng);

/// Same draws shared across many query points.
std::vector<McEstimate> mc_velocity_grid(const PointMixture& mix,
                                         std::span<const std::vector<double>> queries, double t,
                                         const HeteroSchedule& schedule,
                                         const McOptions& options, std::mt19937_64& rng);

/// The closed-form posterior mean as a clean-state predictor for an image
/// mixture. Labels are ignored.
class OraclePredictor final : public CleanPredictor {
 public:
  OraclePredictor(const PointMixture& mix, HeteroSchedule schedule);
  FreqState predict_clean(const FreqState& state, double t, const Label& label) const override;
  Shape image_shape() const override { return *mix_->image_shape(); }

 private:
  const PointMixture* mix_;
  HeteroSchedule schedule_;
};

}  // namespace fdfm
