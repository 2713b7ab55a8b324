// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>

#include "fdfm/verify.hpp"

namespace fdfm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> checkpoint;
  verify::Faults faults;
};

/// Each command reports progress on `out`, diagnostics on `err`, and returns
/// an exit code: 0 success, 1 failed check, 2 configuration or input error,
/// 3 numeric failure.
int cmd_train(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_sample(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_curves(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_verify(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Exclusive lock on a run directory, released on destruction. Throws
/// IoError if another writer holds it.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace fdfm
