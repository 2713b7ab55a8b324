// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/commands.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <functional>

#include <json.hpp>

#include "fdfm/config.hpp"
#include "fdfm/errors.hpp"
#include "fdfm/sampler.hpp"
#include "fdfm/schedules.hpp"
#include "fdfm/tensor_io.hpp"
#include "fdfm/text.hpp"
#include "fdfm/trainer.hpp"

namespace fdfm {

RunLock::RunLock(const std::filesystem::path& dir) : path_(dir / ".fdfm.lock") {
  std::filesystem::create_directories(dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw IoError("run directory " + dir.string() + " is locked by another writer (" +
                  path_.string() + ")");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

RunLock::~RunLock() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

namespace {

using Json = nlohmann::ordered_json;

RunConfig load_or_default(const CommandOptions& options) {
  RunConfig config = options.config ? load_run_config(*options.config) : RunConfig{};
  if (options.seed) config.train.seed = config.sampling.seed = *options.seed;
  return config;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

// Maps library exceptions to the exit-code contract.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const SingularityError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace

int cmd_train(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = load_or_default(options);
    config.train.validate();
    RunLock lock(options.out);
    const FitResult result = fit(config.train);
    save_checkpoint(options.out / "checkpoint", config.train, result.state,
                    result.metrics.wall_seconds);
    write_metrics_csv(options.out / "metrics.csv", config.train, result.metrics);
    out << "trained " << result.metrics.series.size() << " steps";
    if (!result.metrics.series.empty()) {
      out << ", final loss " << format_double(result.metrics.series.back().total);
    }
    out << "\ncheckpoint: " << (options.out / "checkpoint").string() << "\n";
    return kExitOk;
  });
}

int cmd_sample(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!options.checkpoint) throw ConfigError("sample needs --checkpoint DIR");
    RunConfig config = load_or_default(options);
    const Checkpoint ck = load_checkpoint(*options.checkpoint);
    config.sampling.schedule = ck.schedule;
    config.sampling.validate();
    const auto start = std::chrono::steady_clock::now();
    RunLock lock(options.out);
    const FactorizedPredictor predictor(ck.model);
    const auto images = sample(predictor, config.sample_count, config.sampling, config.condition);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_tensor(options.out / "samples.fpxt", stack_images(images, predictor.image_shape()));

    Json manifest;
    Json echo = Json::object();
    for (const auto& [k, v] : sample_echo(config)) echo[k] = v;
    manifest["config"] = echo;
    manifest["seed"] = config.sampling.seed;
    manifest["checkpoint"] = options.checkpoint->string();
    manifest["shape"] = stack_images(images, predictor.image_shape()).shape();
    manifest["timing"] = {{"wall_seconds", wall}};
    write_file(options.out / "samples.json", manifest.dump(2) + "\n");
    out << "wrote " << images.size() << " samples to " << (options.out / "samples.fpxt").string()
        << "\n";
    return kExitOk;
  });
}

int cmd_curves(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = load_or_default(options);
    const HeteroSchedule sch = config.train.schedule();
    sch.validate();
    const FreqWeights weights = config.train.weights();
    weights.validate();
    if (config.curve_points < 2) throw ConfigError("grid must have at least 2 points");
    RunLock lock(options.out);
    std::string text = "t,g_low,g_high,gdot_low,gdot_high,lambda_low,lambda_high\n";
    const std::size_t last = config.curve_points - 1;
    for (std::size_t i = 0; i <= last; ++i) {
      const double t = i == last ? 1.0 : static_cast<double>(i) / static_cast<double>(last);
      const auto v = eval_schedule(sch, t);
      const auto l = lambda_weights(weights, t);
      text += format_double(t) + "," + format_double(v.low.g) + "," + format_double(v.high.g) +
              "," + format_double(v.low.gdot) + "," + format_double(v.high.gdot) + "," +
              format_double(l.low) + "," + format_double(l.high) + "\n";
    }
    write_file(options.out / "curves.csv", text);
    out << "wrote " << config.curve_points << " rows to " << (options.out / "curves.csv").string()
        << "\n";
    return kExitOk;
  });
}

int cmd_sweep(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig config = load_or_default(options);
    config.train.validate();
    config.sweep.sampling = config.sampling;
    config.sweep.sampling.validate();
    for (const auto& [gl, gh] : config.sweep.gammas) HeteroSchedule::power(gl, gh).validate();
    for (double w : config.sweep.omegas) FreqWeights{w}.validate();
    RunLock lock(options.out);
    const auto rows = run_sweep(config.train, config.sweep);
    write_sweep_csv(options.out / "sweep.csv", config.train, rows);
    std::size_t failed = 0;
    for (const auto& r : rows) {
      if (!r.error.empty()) {
        ++failed;
        err << "cell (" << r.cell.gamma_low << ", " << r.cell.gamma_high << ", " << r.cell.omega
            << ") failed: " << r.error << "\n";
      }
    }
    out << "wrote " << rows.size() << " rows (" << failed << " failed) to "
        << (options.out / "sweep.csv").string() << "\n";
    return kExitOk;
  });
}

int cmd_verify(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    for (const auto& check : verify::cli_checks(options.faults)) {
      const verify::CheckResult r = check();
      if (!r.passed) {
        err << "FAIL " << r.module << ": " << r.name << " (" << r.detail << ")\n";
        return kExitCheckFailed;
      }
      char secs[32];
      std::snprintf(secs, sizeof(secs), "%.2fs", r.seconds);
      out << "PASS " << r.module << ": " << r.name << " (" << r.detail << ") [" << secs << "]\n";
    }
    out << "all checks passed\n";
    return kExitOk;
  });
}

}  // namespace fdfm
