// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64, an AVX2 version chosen at runtime. Elementwise kernels and the
// Haar butterflies are bitwise identical across backends (no FMA contraction);
// reductions (dot, squared_distance) differ only in summation order.

namespace fdfm::kernels {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b) noexcept;

struct KernelTable {
  Backend backend;

  // out[i] = a * x[i] + b * y[i]
  void (*axpby)(double a, const double* x, double b, const double* y, double* out, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out[i] = a * (x[i] - y[i])
  void (*scaled_diff)(double a, const double* x, const double* y, double* out, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*squared_distance)(const double* x, const double* y, std::size_t n);

  // One row pair of the orthonormal 2x2 Haar butterfly. `width` is the
  // pixel row length (even); each band output has width / 2 entries.
  void (*haar_analysis_rows)(const double* top, const double* bottom, std::size_t width,
                             double* ll, double* lh, double* hl, double* hh);
  void (*haar_synthesis_rows)(const double* ll, const double* lh, const double* hl,
                              const double* hh, std::size_t half_width, double* top,
                              double* bottom);
};

const KernelTable& scalar_table() noexcept;

/// nullptr when the AVX2 variant was not built or the CPU lacks AVX2.
const KernelTable* avx2_table() noexcept;

/// The table used by the library. Chosen on first use: AVX2 when available,
/// unless the environment variable FDFM_SIMD is set to "scalar".
const KernelTable& active() noexcept;

/// Force a backend. Throws ConfigError if it is unavailable on this machine.
void select(Backend b);

}  // namespace fdfm::kernels
