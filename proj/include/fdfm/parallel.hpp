// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace fdfm {

/// Worker cap: FDFM_THREADS if set to a positive integer, else the hardware
/// concurrency (at least 1).
std::size_t thread_count();

/// Calls fn(i) for every i in [0, n), split into contiguous chunks across at
/// most thread_count() threads. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace fdfm
