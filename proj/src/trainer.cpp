// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "fdfm/errors.hpp"
#include "fdfm/haar.hpp"
#include "fdfm/kernels.hpp"
#include "fdfm/parallel.hpp"
#include "fdfm/tensor_io.hpp"
#include "fdfm/text.hpp"

namespace fdfm {

using Json = nlohmann::ordered_json;

std::string dataset_kind_name(DatasetKind k) {
  switch (k) {
    case DatasetKind::single_point: return "single_point";
    case DatasetKind::point_mixture: return "point_mixture";
    case DatasetKind::checker_texture: return "checker_texture";
  }
  return "unknown";
}

DatasetKind parse_dataset_kind(const std::string& name) {
  if (name == "single_point") return DatasetKind::single_point;
  if (name == "point_mixture") return DatasetKind::point_mixture;
  if (name == "checker_texture") return DatasetKind::checker_texture;
  throw ConfigError("unknown dataset '" + name +
                    "' (expected single_point, point_mixture or checker_texture)");
}

void DatasetSpec::validate() const {
  ModelShape{channels, height, width, 0}.validate();
  if (height > 8 || width > 8) {
    throw ConfigError("dataset images are limited to 8x8, got " +
                      shape_string(image_shape()));
  }
  if (kind == DatasetKind::point_mixture) {
    if (mixture_values.empty()) throw ConfigError("point_mixture needs mixture_values");
    if (mixture_weights.size() != mixture_values.size()) {
      throw ConfigError("mixture_weights must have one entry per mixture value");
    }
    double total = 0.0;
    for (double w : mixture_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("mixture weights must be >= 0");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("mixture weights must sum to 1");
    for (double v : mixture_values) {
      if (!(v >= -1.0 && v <= 1.0)) throw ConfigError("mixture values must lie in [-1, 1]");
    }
  }
  if (!(texture_noise >= 0.0 && texture_noise <= 1.0)) {
    throw ConfigError("texture_noise must lie in [0, 1]");
  }
}

std::size_t DatasetSpec::num_classes() const {
  if (!labeled) return 0;
  switch (kind) {
    case DatasetKind::single_point: return 1;
    case DatasetKind::point_mixture: return mixture_values.size();
    case DatasetKind::checker_texture: return 4;
  }
  return 0;
}

Pixels single_point_image(std::size_t channels, std::size_t height, std::size_t width) {
  Pixels img(channels, height, width);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        img.at(c, y, x) = 0.8 * std::sin(0.9 + 1.7 * static_cast<double>(c) +
                                         1.3 * static_cast<double>(y) +
                                         0.7 * static_cast<double>(x));
      }
    }
  }
  return img;
}

Pixels checker_pattern(std::size_t channels, std::size_t height, std::size_t width,
                       std::size_t pattern) {
  const std::size_t phase = pattern % 2;
  const std::size_t cell = 1 + (pattern / 2) % 2;
  Pixels img(channels, height, width);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        img.at(c, y, x) = ((y / cell + x / cell + phase) % 2 == 0) ? 0.8 : -0.8;
      }
    }
  }
  return img;
}

Dataset::Dataset(DatasetSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  switch (spec_.kind) {
    case DatasetKind::single_point:
      atoms_.push_back(single_point_image(spec_.channels, spec_.height, spec_.width));
      weights_ = {1.0};
      break;
    case DatasetKind::point_mixture:
      for (double v : spec_.mixture_values) {
        atoms_.emplace_back(spec_.channels, spec_.height, spec_.width, v);
      }
      weights_ = spec_.mixture_weights;
      break;
    case DatasetKind::checker_texture:
      weights_.assign(4, 0.25);
      break;
  }
  cumulative_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
}

LabeledImage Dataset::draw(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng) * cumulative_.back();
  const std::size_t index = std::min<std::size_t>(
      static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) -
                               cumulative_.begin()),
      weights_.size() - 1);
  LabeledImage out;
  if (spec_.labeled) out.label = spec_.kind == DatasetKind::single_point ? 0 : index;
  if (spec_.kind == DatasetKind::checker_texture) {
    out.image = checker_pattern(spec_.channels, spec_.height, spec_.width, index);
    std::uniform_real_distribution<double> jitter(-spec_.texture_noise, spec_.texture_noise);
    for (double& v : out.image.values()) v = std::clamp(v + jitter(rng), -1.0, 1.0);
  } else {
    out.image = atoms_[index];
  }
  return out;
}

PointMixture Dataset::mixture() const {
  if (atoms_.empty()) throw ConfigError("checker_texture has no closed-form oracle");
  return PointMixture::from_images(atoms_, weights_);
}

void TrainConfig::validate() const {
  dataset.validate();
  schedule().validate();
  weights().validate();
  time_sampler.validate();
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be positive");
  if (batch == 0) throw ConfigError("batch must be >= 1");
  if (!(cond_dropout >= 0.0 && cond_dropout <= 1.0)) {
    throw ConfigError("cond_dropout must lie in [0, 1]");
  }
  if (!(ema_decay >= 0.0 && ema_decay < 1.0)) throw ConfigError("ema_decay must lie in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ConfigError("weight_decay must be >= 0");
  }
  if (!(t_max > 0.0 && t_max < 1.0)) throw ConfigError("t_max must lie in (0, 1)");
  if (hidden.empty() || std::find(hidden.begin(), hidden.end(), 0u) != hidden.end()) {
    throw ConfigError("hidden widths must be a non-empty list of positive sizes");
  }
}

ModelShape TrainConfig::model_shape() const {
  return {dataset.channels, dataset.height, dataset.width, dataset.num_classes()};
}

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    purpose};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kModelStream = 1;
constexpr std::uint32_t kDataStream = 2;
constexpr std::uint32_t kReferenceStream = 3;

}  // namespace

TrainState TrainState::initialize(const TrainConfig& config) {
  auto rng = stream(config.seed, kModelStream);
  TrainState s;
  s.model = FactorizedModel::create(config.model_shape(), config.hidden, rng);
  if (config.ema) s.ema = s.model;
  if (config.optimizer == Optimizer::adam) {
    s.structure_opt.m.assign(s.model.structure.parameter_count(), 0.0);
    s.structure_opt.v.assign(s.model.structure.parameter_count(), 0.0);
    s.detail_opt.m.assign(s.model.detail.parameter_count(), 0.0);
    s.detail_opt.v.assign(s.model.detail.parameter_count(), 0.0);
  }
  return s;
}

std::string stage_name(StepStage s) {
  switch (s) {
    case StepStage::dwt: return "dwt";
    case StepStage::interpolate: return "interpolate";
    case StepStage::predict: return "predict";
    case StepStage::convert: return "convert";
    case StepStage::loss: return "loss";
    case StepStage::backward: return "backward";
    case StepStage::update: return "update";
  }
  return "unknown";
}

TrainBatch draw_batch(const Dataset& data, const TrainConfig& config, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Shape chw = config.dataset.image_shape();
  TrainBatch b;
  for (std::size_t i = 0; i < config.batch; ++i) {
    LabeledImage item = data.draw(rng);
    const bool drop = uniform(rng) < config.cond_dropout;
    b.images.push_back(std::move(item.image));
    b.labels.push_back(drop ? std::nullopt : item.label);
    b.t.push_back(config.time_sampler.from_normal(normal(rng)));
    Pixels noise(chw[0], chw[1], chw[2]);
    for (double& v : noise.values()) v = normal(rng);
    b.noise.push_back(std::move(noise));
  }
  return b;
}

namespace {

// Fixed chunk count so the gradient reduction order is independent of the
// number of worker threads.
constexpr std::size_t kReductionChunks = 8;

struct ChunkResult {
  ModelGradients grads;
  LossBreakdown loss;
  std::vector<std::size_t> bad;
};

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void apply_update(std::span<double> params, std::span<const double> grad, OptimizerState& opt,
                  const TrainConfig& config, std::size_t step) {
  if (config.optimizer == Optimizer::sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] -= config.lr * (grad[i] + config.weight_decay * params[i]);
    }
    return;
  }
  const double k = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(config.beta1, k);
  const double c2 = 1.0 - std::pow(config.beta2, k);
  for (std::size_t i = 0; i < params.size(); ++i) {
    opt.m[i] = config.beta1 * opt.m[i] + (1.0 - config.beta1) * grad[i];
    opt.v[i] = config.beta2 * opt.v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
    const double mhat = opt.m[i] / c1;
    const double vhat = opt.v[i] / c2;
    params[i] -= config.lr * (mhat / (std::sqrt(vhat) + config.adam_eps) +
                              config.weight_decay * params[i]);
  }
}

void ema_update(MlpParams& ema, const MlpParams& p, double decay) {
  auto e = ema.mutable_parameters();
  const auto src = p.parameters();
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = decay * e[i] + (1.0 - decay) * src[i];
}

}  // namespace

LossBreakdown train_step(TrainState& state, const TrainBatch& batch, const TrainConfig& config,
                         StepObserver* observer) {
  const std::size_t n = batch.images.size();
  if (n == 0 || batch.labels.size() != n || batch.t.size() != n || batch.noise.size() != n) {
    throw DimensionError("training batch components must be non-empty and equally sized");
  }
  const HeteroSchedule sch = config.schedule();
  const FreqWeights weights = config.weights();
  const FactorizedModel& model = state.model;

  const std::size_t chunks = std::min(kReductionChunks, n);
  std::vector<ChunkResult> results(chunks);
  auto run_chunk = [&](std::size_t chunk) {
    ChunkResult& r = results[chunk];
    r.grads = ModelGradients::zeros_like(model);
    for (std::size_t i = n * chunk / chunks; i < n * (chunk + 1) / chunks; ++i) {
      auto notify = [&](StepStage s) {
        if (observer) observer->on_stage(s, i);
      };
      const double t = std::min(batch.t[i], config.t_max);
      if (!all_finite(batch.images[i].values()) || !all_finite(batch.noise[i].values()) ||
          !std::isfinite(t)) {
        r.bad.push_back(i);
        continue;
      }
      notify(StepStage::dwt);
      const FreqState data = dwt2(batch.images[i]);
      const FreqState noise = dwt2(batch.noise[i]);
      notify(StepStage::interpolate);
      const TransportSample path = interpolate(data, noise, t, sch);
      if (observer) observer->on_target(i, path.target_velocity);
      notify(StepStage::predict);
      PredictionTape tape;
      PredictorOutput out = predict(model, path.state, t, batch.labels[i], &tape);
      notify(StepStage::convert);
      const FreqState xhat{std::move(out.l_hat), std::move(out.h_hat)};
      const FreqState v = xpred_to_velocity(xhat, path.state, t, sch, config.t_max);
      notify(StepStage::loss);
      const LossBreakdown lb =
          fa_loss(v, path.target_velocity, t, weights, config.normalization);
      if (!std::isfinite(lb.total)) {
        r.bad.push_back(i);
        continue;
      }
      r.loss.low_term += lb.low_term;
      r.loss.high_term += lb.high_term;
      r.loss.total += lb.total;
      notify(StepStage::backward);
      FreqState g = fa_loss_grad(v, path.target_velocity, t, weights, config.normalization);
      const LambdaPair c = velocity_factors(t, sch, config.t_max);
      for (double& x : g.low.values()) x *= c.low;
      for (double& x : g.high.values()) x *= c.high;
      backward(model, tape, g.low, g.high, r.grads);
    }
  };
  if (observer) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    parallel_for(chunks, run_chunk);
  }

  std::vector<std::size_t> bad;
  for (const auto& r : results) bad.insert(bad.end(), r.bad.begin(), r.bad.end());
  if (!bad.empty()) {
    std::string list;
    for (std::size_t i : bad) list += (list.empty() ? "" : ", ") + std::to_string(i);
    throw NumericError("non-finite training loss at batch indices [" + list + "] (step " +
                           std::to_string(state.step + 1) + ")",
                       bad);
  }

  ModelGradients total = std::move(results[0].grads);
  LossBreakdown loss = results[0].loss;
  for (std::size_t c = 1; c < chunks; ++c) {
    const auto& r = results[c];
    for (std::size_t i = 0; i < total.structure.size(); ++i) total.structure[i] += r.grads.structure[i];
    for (std::size_t i = 0; i < total.detail.size(); ++i) total.detail[i] += r.grads.detail[i];
    loss.low_term += r.loss.low_term;
    loss.high_term += r.loss.high_term;
    loss.total += r.loss.total;
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (double& g : total.structure) g *= inv;
  for (double& g : total.detail) g *= inv;
  loss.low_term *= inv;
  loss.high_term *= inv;
  loss.total *= inv;

  if (observer) observer->on_stage(StepStage::update, 0);
  ++state.step;
  apply_update(state.model.structure.mutable_parameters(), total.structure, state.structure_opt,
               config, state.step);
  apply_update(state.model.detail.mutable_parameters(), total.detail, state.detail_opt, config,
               state.step);
  if (state.ema) {
    ema_update(state.ema->structure, state.model.structure, config.ema_decay);
    ema_update(state.ema->detail, state.model.detail, config.ema_decay);
  }
  return loss;
}

FitResult fit(const TrainConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const Dataset data(config.dataset);
  FitResult result{TrainState::initialize(config), {}};
  auto rng = stream(config.seed, kDataStream);
  result.metrics.series.reserve(config.steps);
  for (std::size_t s = 0; s < config.steps; ++s) {
    const TrainBatch batch = draw_batch(data, config, rng);
    result.metrics.series.push_back(train_step(result.state, batch, config));
  }
  result.metrics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.metrics.config_hash = config_hash(config);
  return result;
}

namespace {

std::vector<std::vector<double>> sorted_rows(std::span<const std::vector<double>> rows) {
  std::vector<std::vector<double>> out(rows.begin(), rows.end());
  std::sort(out.begin(), out.end());
  return out;
}

double mean_distance(const std::vector<std::vector<double>>& a,
                     const std::vector<std::vector<double>>& b) {
  const auto& k = kernels::active();
  std::vector<double> row(a.size());
  parallel_for(a.size(), [&](std::size_t i) {
    double s = 0.0;
    for (const auto& y : b) s += std::sqrt(k.squared_distance(a[i].data(), y.data(), y.size()));
    row[i] = s / static_cast<double>(b.size());
  });
  double s = 0.0;
  for (double r : row) s += r;
  return s / static_cast<double>(a.size());
}

}  // namespace

double energy_distance(std::span<const std::vector<double>> a,
                       std::span<const std::vector<double>> b) {
  if (a.empty() || b.empty()) throw DimensionError("energy distance needs non-empty batches");
  const std::size_t d = a.front().size();
  for (const auto& x : a) {
    if (x.size() != d) throw DimensionError("energy distance inputs have mixed dimensions");
  }
  for (const auto& x : b) {
    if (x.size() != d) throw DimensionError("energy distance inputs have mixed dimensions");
  }
  // Sorting makes the result depend only on the multisets.
  const auto sa = sorted_rows(a);
  const auto sb = sorted_rows(b);
  return 2.0 * mean_distance(sa, sb) - mean_distance(sa, sa) - mean_distance(sb, sb);
}

double energy_distance(std::span<const Pixels> a, std::span<const Pixels> b) {
  auto rows = [](std::span<const Pixels> p) {
    std::vector<std::vector<double>> out;
    out.reserve(p.size());
    for (const auto& x : p) out.emplace_back(x.values().begin(), x.values().end());
    return out;
  };
  return energy_distance(rows(a), rows(b));
}

std::vector<std::pair<std::string, std::string>> config_echo(const TrainConfig& c) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {
      {"dataset", dataset_kind_name(c.dataset.kind)},
      {"channels", std::to_string(c.dataset.channels)},
      {"height", std::to_string(c.dataset.height)},
      {"width", std::to_string(c.dataset.width)},
      {"mixture_values", format_list(c.dataset.mixture_values)},
      {"mixture_weights", format_list(c.dataset.mixture_weights)},
      {"labeled", b(c.dataset.labeled)},
      {"texture_noise", format_double(c.dataset.texture_noise)},
      {"gamma_low", format_double(c.gamma_low)},
      {"gamma_high", format_double(c.gamma_high)},
      {"eps_smooth", format_double(c.eps_smooth)},
      {"omega", format_double(c.omega)},
      {"time_mu", format_double(c.time_sampler.mu)},
      {"time_sigma", format_double(c.time_sampler.sigma)},
      {"normalization", c.normalization == BandNormalization::shared ? "shared" : "per_band"},
      {"t_max", format_double(c.t_max)},
      {"hidden", format_list(c.hidden)},
      {"lr", format_double(c.lr)},
      {"batch", std::to_string(c.batch)},
      {"steps", std::to_string(c.steps)},
      {"cond_dropout", format_double(c.cond_dropout)},
      {"seed", std::to_string(c.seed)},
      {"ema", b(c.ema)},
      {"ema_decay", format_double(c.ema_decay)},
      {"optimizer", c.optimizer == Optimizer::adam ? "adam" : "sgd"},
      {"beta1", format_double(c.beta1)},
      {"beta2", format_double(c.beta2)},
      {"adam_eps", format_double(c.adam_eps)},
      {"weight_decay", format_double(c.weight_decay)},
  };
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t config_hash(const TrainConfig& config) {
  std::string text;
  for (const auto& [k, v] : config_echo(config)) text += k + "=" + v + "\n";
  return fnv1a64(text);
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Tensor params_tensor(const MlpParams& p) {
  const auto v = p.parameters();
  return Tensor({v.size()}, std::vector<double>(v.begin(), v.end()));
}

MlpParams params_from(const Json& widths, const Tensor& values, const std::string& what) {
  MlpParams p(widths.get<std::vector<std::size_t>>());
  if (values.rank() != 1 || values.size() != p.parameter_count()) {
    throw DimensionError(what + " holds " + std::to_string(values.size()) +
                         " values, manifest widths need " + std::to_string(p.parameter_count()));
  }
  std::copy(values.values().begin(), values.values().end(), p.mutable_parameters().begin());
  return p;
}

}  // namespace

void write_metrics_csv(const std::filesystem::path& path, const TrainConfig& config,
                       const RunMetrics& metrics) {
  std::string text = "step,low_term,high_term,total,lr,omega,gamma_low,gamma_high,seed\n";
  const std::string tail = "," + format_double(config.lr) + "," + format_double(config.omega) +
                           "," + format_double(config.gamma_low) + "," +
                           format_double(config.gamma_high) + "," + std::to_string(config.seed) +
                           "\n";
  for (std::size_t i = 0; i < metrics.series.size(); ++i) {
    const auto& l = metrics.series[i];
    text += std::to_string(i + 1) + "," + format_double(l.low_term) + "," +
            format_double(l.high_term) + "," + format_double(l.total) + tail;
  }
  write_text(path, text);
}

void save_checkpoint(const std::filesystem::path& dir, const TrainConfig& config,
                     const TrainState& state, double wall_seconds) {
  std::filesystem::create_directories(dir);
  const auto& m = state.model;
  write_tensor(dir / "structure.fpxt", params_tensor(m.structure));
  write_tensor(dir / "detail.fpxt", params_tensor(m.detail));
  if (state.ema) {
    write_tensor(dir / "ema_structure.fpxt", params_tensor(state.ema->structure));
    write_tensor(dir / "ema_detail.fpxt", params_tensor(state.ema->detail));
  }
  Json manifest;
  manifest["format"] = "fdfm-checkpoint-1";
  manifest["model"] = {{"channels", m.shape.channels},
                       {"height", m.shape.height},
                       {"width", m.shape.width},
                       {"num_classes", m.shape.num_classes},
                       {"structure_widths", m.structure.widths()},
                       {"detail_widths", m.detail.widths()}};
  manifest["steps_done"] = state.step;
  manifest["ema"] = state.ema.has_value();
  Json cfg = Json::object();
  for (const auto& [k, v] : config_echo(config)) cfg[k] = v;
  manifest["config"] = cfg;
  manifest["config_hash"] = hex64(config_hash(config));
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  Json timing;
  timing["wall_seconds"] = wall_seconds;
  write_text(dir / "timing.json", timing.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  const std::string text = read_text(dir / "manifest.json");
  Checkpoint ck;
  ck.manifest = text;
  try {
    const Json manifest = Json::parse(text);
    if (manifest.at("format") != "fdfm-checkpoint-1") {
      throw IoError("unsupported checkpoint format in " + (dir / "manifest.json").string());
    }
    const Json& model = manifest.at("model");
    ck.model.shape = {model.at("channels").get<std::size_t>(), model.at("height").get<std::size_t>(),
                      model.at("width").get<std::size_t>(),
                      model.at("num_classes").get<std::size_t>()};
    const bool ema = manifest.at("ema").get<bool>();
    ck.model.structure = params_from(
        model.at("structure_widths"),
        read_tensor(dir / (ema ? "ema_structure.fpxt" : "structure.fpxt")), "structure tensor");
    ck.model.detail = params_from(model.at("detail_widths"),
                                  read_tensor(dir / (ema ? "ema_detail.fpxt" : "detail.fpxt")),
                                  "detail tensor");
    const Json& cfg = manifest.at("config");
    auto num = [&](const char* key) { return std::stod(cfg.at(key).get<std::string>()); };
    ck.schedule = HeteroSchedule::power(num("gamma_low"), num("gamma_high"), num("eps_smooth"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint manifest in " + dir.string() + ": " + e.what());
  } catch (const std::invalid_argument&) {
    throw IoError("malformed number in checkpoint manifest in " + dir.string());
  }
  ck.model.validate();
  ck.schedule.validate();
  return ck;
}

std::vector<SweepCell> sweep_cells(const SweepOptions& options) {
  std::vector<SweepCell> cells;
  if (options.cross) {
    for (const auto& [gl, gh] : options.gammas) {
      for (double w : options.omegas) cells.push_back({gl, gh, w});
    }
    return cells;
  }
  if (options.omegas.empty()) throw ConfigError("sweep needs at least one omega");
  for (const auto& [gl, gh] : options.gammas) cells.push_back({gl, gh, options.omegas.front()});
  for (std::size_t i = 1; i < options.omegas.size(); ++i) {
    cells.push_back({options.anchor.first, options.anchor.second, options.omegas[i]});
  }
  return cells;
}

std::vector<SweepRow> run_sweep(const TrainConfig& base, const SweepOptions& options) {
  std::vector<SweepRow> rows;
  const Dataset data(base.dataset);
  auto rng = stream(base.seed, kReferenceStream);
  std::vector<Pixels> reference;
  for (std::size_t i = 0; i < options.sample_count; ++i) reference.push_back(data.draw(rng).image);

  for (const SweepCell& cell : sweep_cells(options)) {
    SweepRow row{cell, std::nullopt, std::nullopt, {}};
    try {
      TrainConfig config = base;
      config.gamma_low = cell.gamma_low;
      config.gamma_high = cell.gamma_high;
      config.omega = cell.omega;
      const FitResult result = fit(config);
      const auto& series = result.metrics.series;
      if (!series.empty()) {
        const std::size_t window = std::min<std::size_t>(100, series.size());
        double s = 0.0;
        for (std::size_t i = series.size() - window; i < series.size(); ++i) s += series[i].total;
        row.final_loss = s / static_cast<double>(window);
      }
      SampleConfig sc = options.sampling;
      sc.schedule = config.schedule();
      const FactorizedPredictor predictor(result.state.inference_model());
      const auto generated = sample(predictor, options.sample_count, sc, std::nullopt);
      row.energy_distance = energy_distance(generated, reference);
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const TrainConfig& base,
                     std::span<const SweepRow> rows) {
  std::string text = "gamma_low,gamma_high,omega,seed,energy_distance,final_loss,status,error\n";
  for (const auto& r : rows) {
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    text += format_double(r.cell.gamma_low) + "," + format_double(r.cell.gamma_high) + "," +
            format_double(r.cell.omega) + "," + std::to_string(base.seed) + "," +
            (r.energy_distance ? format_double(*r.energy_distance) : "") + "," +
            (r.final_loss ? format_double(*r.final_loss) : "") + "," +
            (r.error.empty() ? "ok" : "failed") + "," + error + "\n";
  }
  write_text(path, text);
}

}  // namespace fdfm
