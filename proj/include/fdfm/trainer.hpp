// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fdfm/objective.hpp"
#include "fdfm/oracle.hpp"
#include "fdfm/predictor.hpp"
#include "fdfm/sampler.hpp"
#include "fdfm/schedules.hpp"
#include "fdfm/tensor.hpp"
#include "fdfm/transport.hpp"

namespace fdfm {

enum class DatasetKind { single_point, point_mixture, checker_texture };

std::string dataset_kind_name(DatasetKind k);
DatasetKind parse_dataset_kind(const std::string& name);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::single_point;
  std::size_t channels = 1;
  std::size_t height = 2;
  std::size_t width = 2;
  /// point_mixture: atom i is the constant image mixture_values[i].
  std::vector<double> mixture_values{-0.8, 0.8};
  std::vector<double> mixture_weights{0.5, 0.5};
  /// One class per atom (point_mixture) or per pattern (checker_texture).
  bool labeled = false;
  /// checker_texture: amplitude of the additive uniform noise.
  double texture_noise = 0.05;

  /// Throws ConfigError / DimensionError on invalid settings.
  void validate() const;
  Shape image_shape() const { return {channels, height, width}; }
  std::size_t num_classes() const;
};

struct LabeledImage {
  Pixels image;
  Label label;
};

class Dataset {
 public:
  explicit Dataset(DatasetSpec spec);

  const DatasetSpec& spec() const noexcept { return spec_; }
  LabeledImage draw(std::mt19937_64& rng) const;
  /// Atoms of a single_point or point_mixture dataset; empty for textures.
  const std::vector<Pixels>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& atom_weights() const noexcept { return weights_; }
  /// Closed-form oracle for point datasets. Throws ConfigError for textures.
  PointMixture mixture() const;

 private:
  DatasetSpec spec_;
  std::vector<Pixels> atoms_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

/// The deterministic image used by the single_point dataset.
Pixels single_point_image(std::size_t channels, std::size_t height, std::size_t width);
/// Noise-free checkerboard for pattern index 0..3 (phase = p % 2, cell = 1 + p / 2).
Pixels checker_pattern(std::size_t channels, std::size_t height, std::size_t width,
                       std::size_t pattern);

enum class Optimizer { sgd, adam };

struct TrainConfig {
  DatasetSpec dataset;
  double gamma_low = 1.0;
  double gamma_high = 1.0;
  double eps_smooth = kDefaultEpsSmooth;
  double omega = 0.0;
  TimeSampler time_sampler;
  BandNormalization normalization = BandNormalization::shared;
  double t_max = kDefaultTMax;
  std::vector<std::size_t> hidden{64, 64};

  double lr = 1e-4;
  std::size_t batch = 64;
  std::size_t steps = 1000;
  double cond_dropout = 0.1;
  std::uint64_t seed = 0;
  bool ema = false;
  double ema_decay = 0.9999;
  Optimizer optimizer = Optimizer::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;

  /// Throws ConfigError on invalid settings. steps == 0 is allowed.
  void validate() const;
  HeteroSchedule schedule() const { return HeteroSchedule::power(gamma_low, gamma_high, eps_smooth); }
  FreqWeights weights() const { return {omega}; }
  ModelShape model_shape() const;
};

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
};

struct TrainState {
  FactorizedModel model;
  std::optional<FactorizedModel> ema;
  OptimizerState structure_opt;
  OptimizerState detail_opt;
  std::size_t step = 0;

  /// Freshly initialized model for `config`.
  static TrainState initialize(const TrainConfig& config);
  /// The model to sample from: the EMA copy when enabled.
  const FactorizedModel& inference_model() const { return ema ? *ema : model; }
};

/// Stages of one training step, in the order they must occur per element.
enum class StepStage { dwt, interpolate, predict, convert, loss, backward, update };

std::string stage_name(StepStage s);

/// Test hook: sees every stage as it happens.
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void on_stage(StepStage stage, std::size_t element) = 0;
  /// Called once per element with the regression target.
  virtual void on_target(std::size_t /*element*/, const FreqState& /*v_target*/) {}
};

struct TrainBatch {
  std::vector<Pixels> images;
  std::vector<Label> labels;
  std::vector<double> t;
  std::vector<Pixels> noise;
};

/// Draws a batch (images, dropped-out labels, times, noise) from `rng`. The
/// draw order does not depend on omega or the schedule.
TrainBatch draw_batch(const Dataset& data, const TrainConfig& config, std::mt19937_64& rng);

/// One optimizer step on the frequency-aligned loss averaged over the batch.
/// Throws NumericError naming the offending batch indices if any element has
/// non-finite inputs or a non-finite loss; the model is left untouched then.
LossBreakdown train_step(TrainState& state, const TrainBatch& batch, const TrainConfig& config,
                         StepObserver* observer = nullptr);

struct RunMetrics {
  std::vector<LossBreakdown> series;
  std::optional<double> energy_distance;
  double wall_seconds = 0.0;
  std::uint64_t config_hash = 0;
};

struct FitResult {
  TrainState state;
  RunMetrics metrics;
};

/// Runs config.steps training steps from a fresh model. Deterministic per seed.
FitResult fit(const TrainConfig& config);

/// Energy distance 2 E|A-B| - E|A-A'| - E|B-B'| with all pairs (V-statistic).
/// Throws DimensionError on an empty batch or mismatched dimensions.
double energy_distance(std::span<const std::vector<double>> a,
                       std::span<const std::vector<double>> b);
double energy_distance(std::span<const Pixels> a, std::span<const Pixels> b);

/// Canonical key = value echo of every setting; the config hash covers it.
std::vector<std::pair<std::string, std::string>> config_echo(const TrainConfig& config);
std::uint64_t config_hash(const TrainConfig& config);
std::uint64_t fnv1a64(std::string_view bytes);

/// Metrics CSV: header plus one row per executed step.
void write_metrics_csv(const std::filesystem::path& path, const TrainConfig& config,
                       const RunMetrics& metrics);

/// Checkpoint directory: one FPXT1 tensor per network plus manifest.json.
/// Wall time goes to timing.json so the rest is byte-identical across reruns.
void save_checkpoint(const std::filesystem::path& dir, const TrainConfig& config,
                     const TrainState& state, double wall_seconds);
struct Checkpoint {
  FactorizedModel model;
  HeteroSchedule schedule;
  std::string manifest;
};
/// Loads the inference model. Throws IoError / DimensionError on malformed or
/// inconsistent files.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

struct SweepCell {
  double gamma_low;
  double gamma_high;
  double omega;
};

struct SweepOptions {
  std::vector<std::pair<double, double>> gammas{
      {0.9, 1.1}, {0.95, 1.05}, {1.0, 1.0}, {1.05, 0.95}, {1.1, 0.9}};
  std::vector<double> omegas{0.0, 0.3, 0.5, 0.7, -0.7};
  /// Full cross product when true. Otherwise one cell per gamma pair at
  /// omegas.front() and one per remaining omega at `anchor`.
  bool cross = false;
  std::pair<double, double> anchor{0.95, 1.05};
  std::size_t sample_count = 500;
  SampleConfig sampling;
};

struct SweepRow {
  SweepCell cell;
  std::optional<double> energy_distance;
  std::optional<double> final_loss;
  std::string error;
};

std::vector<SweepCell> sweep_cells(const SweepOptions& options);

/// One fit + sample + energy distance per cell; failures are recorded and the
/// sweep continues. Reference samples come from the dataset with a seed
/// disjoint from training.
std::vector<SweepRow> run_sweep(const TrainConfig& base, const SweepOptions& options);
void write_sweep_csv(const std::filesystem::path& path, const TrainConfig& base,
                     std::span<const SweepRow> rows);

}  // namespace fdfm
