// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "fdfm/errors.hpp"
#include "fdfm/haar.hpp"
#include "fdfm/oracle.hpp"
#include "fdfm/sampler.hpp"
#include "fdfm/tensor_io.hpp"
#include "fdfm/trainer.hpp"
#include "test_util.hpp"

using namespace fdfm;
using namespace fdfm::testing;

namespace {

// Frozen single-point run: reaches a 100-step mean loss below 1e-4 by step 5000.
TrainConfig single_point_config() {
  TrainConfig c;
  c.dataset.kind = DatasetKind::single_point;
  c.dataset.height = 4;
  c.dataset.width = 4;
  c.lr = 1e-3;
  c.batch = 64;
  c.steps = 5000;
  c.hidden = {32, 32};
  c.seed = 7;
  return c;
}

const FitResult& single_point_run() {
  static const FitResult result = fit(single_point_config());
  return result;
}

TrainConfig small_config() {
  TrainConfig c;
  c.dataset.kind = DatasetKind::checker_texture;
  c.dataset.height = 4;
  c.dataset.width = 4;
  c.dataset.labeled = true;
  c.gamma_low = 0.95;
  c.gamma_high = 1.05;
  c.hidden = {8};
  c.batch = 16;
  c.steps = 20;
  c.lr = 1e-3;
  c.seed = 3;
  return c;
}

double window_mean(const std::vector<LossBreakdown>& s, std::size_t begin, std::size_t end) {
  double m = 0.0;
  for (std::size_t i = begin; i < end; ++i) m += s[i].total;
  return m / static_cast<double>(end - begin);
}

class Spy final : public StepObserver {
 public:
  std::vector<std::pair<StepStage, std::size_t>> events;
  std::vector<FreqState> targets;
  void on_stage(StepStage stage, std::size_t element) override { events.emplace_back(stage, element); }
  void on_target(std::size_t, const FreqState& v) override { targets.push_back(v); }
};

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("datasets") {
  const Pixels p0 = checker_pattern(1, 8, 8, 0);
  const Pixels p1 = checker_pattern(1, 8, 8, 1);
  const Pixels p2 = checker_pattern(1, 8, 8, 2);
  CHECK(p0.at(0, 0, 0) == 0.8);
  CHECK(p0.at(0, 0, 1) == -0.8);
  CHECK(p1.at(0, 0, 0) == -0.8);
  CHECK(p2.at(0, 0, 1) == 0.8);
  CHECK(p2.at(0, 0, 2) == -0.8);

  DatasetSpec spec;
  spec.kind = DatasetKind::point_mixture;
  spec.labeled = true;
  const Dataset d(spec);
  CHECK(d.atoms().size() == 2);
  CHECK(spec.num_classes() == 2);
  std::mt19937_64 rng(71);
  const auto item = d.draw(rng);
  REQUIRE(item.label.has_value());
  CHECK(item.image == d.atoms()[*item.label]);
  CHECK(d.mixture().size() == 2);

  DatasetSpec tex;
  tex.kind = DatasetKind::checker_texture;
  tex.height = tex.width = 8;
  const Dataset t(tex);
  const Pixels noisy = t.draw(rng).image;
  for (double v : noisy.values()) CHECK(std::abs(std::abs(v) - 0.8) <= 0.05);
  CHECK_THROWS_AS(t.mixture(), ConfigError);
  const Pixels point = single_point_image(2, 4, 4);
  for (double v : point.values()) CHECK(std::abs(v) <= 0.8);

  auto invalid = [](auto edit) {
    DatasetSpec s;
    s.kind = DatasetKind::point_mixture;
    edit(s);
    return s;
  };
  CHECK_THROWS_AS(invalid([](DatasetSpec& s) { s.height = 16; }).validate(), ConfigError);
  CHECK_THROWS_AS(invalid([](DatasetSpec& s) { s.width = 3; }).validate(), DimensionError);
  CHECK_THROWS_AS(invalid([](DatasetSpec& s) { s.mixture_values = {1.5, 0.0}; }).validate(),
                  ConfigError);
  CHECK_THROWS_AS(invalid([](DatasetSpec& s) { s.mixture_weights = {0.5}; }).validate(),
                  ConfigError);
  CHECK_THROWS_AS(invalid([](DatasetSpec& s) { s.mixture_weights = {0.7, 0.7}; }).validate(),
                  ConfigError);
  CHECK(parse_dataset_kind(dataset_kind_name(DatasetKind::checker_texture)) ==
        DatasetKind::checker_texture);
  CHECK_THROWS_AS(parse_dataset_kind("moons"), ConfigError);
}

TEST_CASE("config validation") {
  auto bad = [](auto edit) {
    TrainConfig c;
    edit(c);
    return c;
  };
  CHECK_NOTHROW(TrainConfig{}.validate());
  CHECK_NOTHROW(bad([](TrainConfig& c) { c.steps = 0; }).validate());
  CHECK_THROWS_AS(bad([](TrainConfig& c) { c.lr = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](TrainConfig& c) { c.batch = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](TrainConfig& c) { c.omega = 1.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](TrainConfig& c) { c.gamma_low = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](TrainConfig& c) { c.cond_dropout = 1.5; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](TrainConfig& c) { c.hidden = {}; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](TrainConfig& c) { c.ema_decay = 1.0; }).validate(), ConfigError);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  TrainConfig c = small_config();
  TrainState state = TrainState::initialize(c);
  const TrainState before = state;
  c.lr = 0.0;
  std::mt19937_64 rng(72);
  const auto loss = train_step(state, draw_batch(Dataset(c.dataset), c, rng), c);
  CHECK(std::isfinite(loss.total));
  CHECK(loss.total > 0.0);
  CHECK(state.model.structure == before.model.structure);
  CHECK(state.model.detail == before.model.detail);
  CHECK(state.step == 1);
}

TEST_CASE("stages run in training-step order") {
  const TrainConfig c = small_config();
  TrainState state = TrainState::initialize(c);
  std::mt19937_64 rng(73);
  const TrainBatch batch = draw_batch(Dataset(c.dataset), c, rng);
  Spy spy;
  train_step(state, batch, c, &spy);
  const std::vector<StepStage> per_element{StepStage::dwt,     StepStage::interpolate,
                                           StepStage::predict, StepStage::convert,
                                           StepStage::loss,    StepStage::backward};
  REQUIRE(spy.events.size() == per_element.size() * c.batch + 1);
  for (std::size_t i = 0; i < c.batch; ++i) {
    for (std::size_t k = 0; k < per_element.size(); ++k) {
      const auto& e = spy.events[i * per_element.size() + k];
      CHECK(e.first == per_element[k]);
      CHECK(e.second == i);
    }
  }
  CHECK(spy.events.back().first == StepStage::update);
  CHECK(stage_name(StepStage::convert) == "convert");
}

TEST_CASE("targets and draws do not depend on omega") {
  TrainConfig a = small_config(), b = small_config();
  a.omega = 0.0;
  b.omega = 0.7;
  std::mt19937_64 ra(74), rb(74);
  const TrainBatch ba = draw_batch(Dataset(a.dataset), a, ra);
  const TrainBatch bb = draw_batch(Dataset(b.dataset), b, rb);
  CHECK(ba.t == bb.t);
  CHECK(ba.noise == bb.noise);
  CHECK(ba.images == bb.images);
  TrainState sa = TrainState::initialize(a), sb = TrainState::initialize(b);
  Spy spy_a, spy_b;
  const auto la = train_step(sa, ba, a, &spy_a);
  const auto lb = train_step(sb, bb, b, &spy_b);
  CHECK(spy_a.targets == spy_b.targets);
  CHECK(la.total != lb.total);
}

TEST_CASE("non-finite loss names the batch indices and leaves the model alone") {
  const TrainConfig c = small_config();
  TrainState state = TrainState::initialize(c);
  const TrainState before = state;
  std::mt19937_64 rng(75);
  TrainBatch batch = draw_batch(Dataset(c.dataset), c, rng);
  batch.images[2].at(0, 1, 1) = std::numeric_limits<double>::infinity();
  batch.noise[5].at(0, 0, 0) = 1e300;  // finite, but the squared error overflows
  try {
    train_step(state, batch, c);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(e.indices() == std::vector<std::size_t>{2, 5});
    CHECK(std::string(e.what()).find("[2, 5]") != std::string::npos);
  }
  CHECK(state.model.structure == before.model.structure);
  CHECK(state.step == 0);
  TrainBatch empty;
  CHECK_THROWS_AS(train_step(state, empty, c), DimensionError);
}

TEST_CASE("homogeneous unweighted cell is plain flow matching") {
  TrainConfig c = small_config();
  c.gamma_low = c.gamma_high = 1.0;
  c.omega = 0.0;
  TrainState state = TrainState::initialize(c);
  std::mt19937_64 rng(76);
  const TrainBatch batch = draw_batch(Dataset(c.dataset), c, rng);
  double expected = 0.0;
  for (std::size_t i = 0; i < batch.images.size(); ++i) {
    const double t = batch.t[i];
    const Pixels xt = axpby(t, batch.images[i], 1.0 - t, batch.noise[i]);
    const auto out = predict(state.model, dwt2(xt), t, batch.labels[i]);
    const Pixels v = axpby(1.0 / (1.0 - t), out.x_hat, -1.0 / (1.0 - t), xt);
    expected += cfm_loss(v, axpby(1.0, batch.images[i], -1.0, batch.noise[i]));
  }
  expected /= static_cast<double>(batch.images.size());
  CHECK(train_step(state, batch, c).total == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("steps = 0 returns the initialized model") {
  TrainConfig c = small_config();
  c.steps = 0;
  const FitResult r = fit(c);
  CHECK(r.metrics.series.empty());
  CHECK(r.state.step == 0);
  CHECK(r.state.model.structure == TrainState::initialize(c).model.structure);
}

TEST_CASE("same seed gives bitwise-identical parameters") {
  TrainConfig c = small_config();
  c.ema = true;
  c.ema_decay = 0.9;
  const FitResult a = fit(c);
  const FitResult b = fit(c);
  CHECK(a.state.model.structure == b.state.model.structure);
  CHECK(a.state.model.detail == b.state.model.detail);
  CHECK(a.state.ema->detail == b.state.ema->detail);
  CHECK(a.metrics.config_hash == b.metrics.config_hash);
  c.seed = 4;
  CHECK(fit(c).state.model.structure != a.state.model.structure);
}

TEST_CASE("single-point run converges") {
  const FitResult& r = single_point_run();
  const auto& s = r.metrics.series;
  REQUIRE(s.size() == 5000);
  CHECK(window_mean(s, 4900, 5000) < 1e-4);

  // 100-step moving average over the first 2000 steps: no uptick above 5%.
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t begin = 0; begin + 100 <= 2000; begin += 100) {
    const double m = window_mean(s, begin, begin + 100);
    CHECK(m <= 1.05 * previous);
    previous = m;
  }
}

TEST_CASE("single-point model predicts the data point and samples land on it") {
  const FitResult& r = single_point_run();
  const Pixels x0 = single_point_image(1, 4, 4);
  const FactorizedPredictor predictor(r.state.inference_model());
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double t = 0.05 + 0.9 * i / 49.0;
    const auto path = interpolate(x0, random_pixels(rng, 1, 4, 4), t, single_point_config().schedule());
    const Pixels xhat = idwt2(predictor.predict_clean(path.state, t, std::nullopt));
    worst = std::max(worst, max_abs_diff(xhat.values(), x0.values()));
  }
  CHECK(worst < 0.05);
  SampleConfig sc;
  sc.seed = 5;
  for (const auto& x : sample(predictor, 64, sc, std::nullopt))
    CHECK(max_abs_diff(x.values(), x0.values()) <= 0.05);
}

TEST_CASE("energy distance") {
  std::vector<std::vector<double>> a{{0.0, 1.0}, {2.0, 0.5}, {-1.0, 3.0}, {2.0, 0.5}};
  std::vector<std::vector<double>> b{a[3], a[2], a[0], a[1]};
  CHECK(energy_distance(a, b) == 0.0);
  const std::vector<std::vector<double>> p(5, {0.0, 0.0}), q(7, {3.0, 4.0});
  CHECK(energy_distance(p, q) == doctest::Approx(10.0));
  const std::vector<std::vector<double>> empty;
  CHECK_THROWS_AS(energy_distance(empty, p), DimensionError);
  const std::vector<std::vector<double>> wide{{1.0, 2.0, 3.0}};
  CHECK_THROWS_AS(energy_distance(wide, p), DimensionError);
}

TEST_CASE("held-out mixture samples stay below the same-distribution threshold") {
  // 95th percentile of 2 D (p_a - p_b)^2 over 50 seeds for two independent
  // n = 2000 draws from the default two-point dataset, D = 3.2.
  constexpr double kThreshold = 0.0043264;
  DatasetSpec spec;
  spec.kind = DatasetKind::point_mixture;
  const Dataset d(spec);
  std::mt19937_64 ra(78), rb(79);
  std::vector<Pixels> a, b;
  for (int i = 0; i < 2000; ++i) {
    a.push_back(d.draw(ra).image);
    b.push_back(d.draw(rb).image);
  }
  CHECK(energy_distance(a, b) < kThreshold);
}

TEST_CASE("config echo, hash and metrics csv") {
  TrainConfig c = small_config();
  const auto echo = config_echo(c);
  CHECK(echo.front().first == "dataset");
  const auto h = config_hash(c);
  c.omega = 0.3;
  CHECK(config_hash(c) != h);
  CHECK(fnv1a64("") == 14695981039346656037ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);

  const auto dir = scratch_dir("metrics");
  RunMetrics m;
  m.series = {{0.5, 0.25, 0.75}, {0.125, 0.5, 0.625}};
  write_metrics_csv(dir / "m.csv", c, m);
  CHECK(slurp(dir / "m.csv") ==
        "step,low_term,high_term,total,lr,omega,gamma_low,gamma_high,seed\n"
        "1,0.5,0.25,0.75,0.001,0.3,0.95,1.05,3\n"
        "2,0.125,0.5,0.625,0.001,0.3,0.95,1.05,3\n");
}

TEST_CASE("checkpoint round trip") {
  TrainConfig c = small_config();
  c.ema = true;
  c.ema_decay = 0.5;
  const FitResult r = fit(c);
  const auto dir = scratch_dir("checkpoint");
  save_checkpoint(dir / "a", c, r.state, 1.0);
  save_checkpoint(dir / "b", c, r.state, 2.0);
  CHECK(slurp(dir / "a" / "manifest.json") == slurp(dir / "b" / "manifest.json"));
  CHECK(slurp(dir / "a" / "structure.fpxt") == slurp(dir / "b" / "structure.fpxt"));
  CHECK(slurp(dir / "a" / "timing.json") != slurp(dir / "b" / "timing.json"));

  const Checkpoint ck = load_checkpoint(dir / "a");
  CHECK(ck.model.shape == r.state.model.shape);
  CHECK(ck.model.structure == r.state.ema->structure);
  CHECK(ck.model.detail == r.state.ema->detail);
  CHECK(ck.schedule.low.gamma == 0.95);
  CHECK(ck.schedule.high.gamma == 1.05);
  CHECK(ck.manifest.find("\"config_hash\"") != std::string::npos);

  CHECK_THROWS_AS(load_checkpoint(dir / "missing"), IoError);
  std::filesystem::remove(dir / "b" / "ema_detail.fpxt");
  CHECK_THROWS_AS(load_checkpoint(dir / "b"), IoError);
  write_tensor(dir / "a" / "ema_detail.fpxt", Tensor({3}, 0.0));
  CHECK_THROWS_AS(load_checkpoint(dir / "a"), DimensionError);
}

TEST_CASE("one-cell sweep equals a direct fit") {
  TrainConfig base = small_config();
  base.dataset.labeled = false;
  SweepOptions opt;
  opt.gammas = {{1.05, 0.95}};
  opt.omegas = {0.3};
  opt.sample_count = 50;
  opt.sampling.steps = 5;
  const auto rows = run_sweep(base, opt);
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].energy_distance.has_value());

  TrainConfig direct = base;
  direct.gamma_low = 1.05;
  direct.gamma_high = 0.95;
  direct.omega = 0.3;
  const FitResult r = fit(direct);
  CHECK(*rows[0].final_loss == doctest::Approx(window_mean(r.metrics.series, 0, 20)).epsilon(1e-14));
  SampleConfig sc = opt.sampling;
  sc.schedule = direct.schedule();
  const auto generated = sample(FactorizedPredictor(r.state.inference_model()), 50, sc, std::nullopt);
  std::vector<Pixels> generated_copy = generated;
  CHECK(*rows[0].energy_distance > 0.0);
  CHECK(energy_distance(generated_copy, generated) == 0.0);

  const auto dir = scratch_dir("sweep");
  write_sweep_csv(dir / "s.csv", base, rows);
  CHECK(slurp(dir / "s.csv").rfind("gamma_low,gamma_high,omega,seed,energy_distance,final_loss,status,error\n1.05,0.95,0.3,3,", 0) == 0);
}

TEST_CASE("sweep layouts and failure rows") {
  SweepOptions opt;
  const auto cells = sweep_cells(opt);
  CHECK(cells.size() == 9);
  CHECK(cells[0].omega == 0.0);
  CHECK(cells[5].gamma_low == 0.95);
  CHECK(cells[5].omega == 0.3);
  opt.cross = true;
  CHECK(sweep_cells(opt).size() == 25);

  TrainConfig base = small_config();
  base.dataset.labeled = false;
  base.steps = 2;
  SweepOptions bad;
  bad.gammas = {{1.0, 1.0}, {-1.0, 1.0}};
  bad.omegas = {0.0};
  bad.sample_count = 10;
  bad.sampling.steps = 2;
  const auto rows = run_sweep(base, bad);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].error.empty());
  CHECK_FALSE(rows[1].error.empty());
  CHECK_FALSE(rows[1].energy_distance.has_value());
}

}  // TEST_SUITE
