// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "fdfm/errors.hpp"
#include "kernels_impl.hpp"

namespace fdfm::kernels {

namespace {

constexpr KernelTable kScalar{
    Backend::scalar,         scalar::axpby,
    scalar::axpy,            scalar::scaled_diff,
    scalar::dot,             scalar::squared_distance,
    scalar::haar_analysis_rows, scalar::haar_synthesis_rows,
};

#if defined(FDFM_HAVE_AVX2)
constexpr KernelTable kAvx2{
    Backend::avx2,         avx2::axpby,
    avx2::axpy,            avx2::scaled_diff,
    avx2::dot,             avx2::squared_distance,
    avx2::haar_analysis_rows, avx2::haar_synthesis_rows,
};
#endif

bool cpu_has_avx2() noexcept {
#if defined(FDFM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* initial_table() noexcept {
  const char* env = std::getenv("FDFM_SIMD");
  if (env != nullptr && std::string(env) == "scalar") return &kScalar;
  if (const KernelTable* t = avx2_table()) return t;
  return &kScalar;
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* avx2_table() noexcept {
#if defined(FDFM_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

void select(Backend b) {
  const KernelTable* table = b == Backend::scalar ? &kScalar : avx2_table();
  if (table == nullptr) {
    throw ConfigError("kernel backend '" + std::string(backend_name(b)) +
                      "' is not available on this machine");
  }
  current().store(table, std::memory_order_release);
}

}  // namespace fdfm::kernels
