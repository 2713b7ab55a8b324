// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fdfm/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Frequency-decoupled flow matching toolkit"};
  app.require_subcommand(1);

  fdfm::CommandOptions options;
  std::string config, out = ".", checkpoint;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "run configuration file (key = value)");
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the configured seed");
  };
  auto* train = app.add_subcommand("train", "fit a model and write a checkpoint");
  auto* sample = app.add_subcommand("sample", "generate samples from a checkpoint");
  auto* curves = app.add_subcommand("curves", "write schedule and weight curves as CSV");
  auto* sweep = app.add_subcommand("sweep", "run the gamma/omega ablation grid");
  auto* verify = app.add_subcommand("verify", "run the built-in invariant checks");
  for (auto* sub : {train, sample, curves, sweep, verify}) common(sub);
  sample->add_option("--checkpoint", checkpoint, "checkpoint directory from `train`");
  verify->add_option("--fault-dwt-scale", options.faults.dwt_scale,
                     "scale the forward transform (harness self-test)")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? fdfm::kExitOk : fdfm::kExitConfig;
  }

  if (!config.empty()) options.config = config;
  options.out = out;
  for (auto* sub : {train, sample, curves, sweep, verify}) {
    if (sub->count("--seed") > 0) options.seed = seed;
  }
  if (!checkpoint.empty()) options.checkpoint = checkpoint;

  if (*train) return fdfm::cmd_train(options, std::cout, std::cerr);
  if (*sample) return fdfm::cmd_sample(options, std::cout, std::cerr);
  if (*curves) return fdfm::cmd_curves(options, std::cout, std::cerr);
  if (*sweep) return fdfm::cmd_sweep(options, std::cout, std::cerr);
  return fdfm::cmd_verify(options, std::cout, std::cerr);
}
