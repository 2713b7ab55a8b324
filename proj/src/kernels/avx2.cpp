// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 only (no -mfma) so elementwise results match the
// scalar reference bit for bit.

#include "kernels_impl.hpp"

#include <immintrin.h>

namespace fdfm::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  // (l0 + l1) + (l2 + l3)
  const __m128d pair = _mm_hadd_pd(lo, hi);
  return _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
}

}  // namespace

void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    const __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(ax, by));
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), ax));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scaled_diff(double a, const double* x, const double* y, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(va, d));
  }
  for (; i < n; ++i) out[i] = a * (x[i] - y[i]);
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

double squared_distance(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double total = hsum(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    total += d * d;
  }
  return total;
}

void haar_analysis_rows(const double* top, const double* bottom, std::size_t width, double* ll,
                        double* lh, double* hl, double* hh) {
  const std::size_t half = width / 2;
  const __m256d scale = _mm256_set1_pd(0.5);
  std::size_t j = 0;
  // Two 2x2 blocks per iteration: top = [a0 b0 a1 b1], bottom = [c0 d0 c1 d1].
  for (; j + 2 <= half; j += 2) {
    const __m256d t = _mm256_loadu_pd(top + 2 * j);
    const __m256d b = _mm256_loadu_pd(bottom + 2 * j);
    const __m256d sums = _mm256_hadd_pd(t, b);   // [a0+b0, c0+d0, a1+b1, c1+d1]
    const __m256d diffs = _mm256_hsub_pd(t, b);  // [a0-b0, c0-d0, a1-b1, c1-d1]
    // [ll0 hl0 ll1 hl1] and [lh0 hh0 lh1 hh1]
    const __m256d plus = _mm256_mul_pd(_mm256_hadd_pd(sums, diffs), scale);
    const __m256d minus = _mm256_mul_pd(_mm256_hsub_pd(sums, diffs), scale);
    const __m256d plus_sorted = _mm256_permute4x64_pd(plus, 0b11011000);    // [ll0 ll1 hl0 hl1]
    const __m256d minus_sorted = _mm256_permute4x64_pd(minus, 0b11011000);  // [lh0 lh1 hh0 hh1]
    _mm_storeu_pd(ll + j, _mm256_castpd256_pd128(plus_sorted));
    _mm_storeu_pd(hl + j, _mm256_extractf128_pd(plus_sorted, 1));
    _mm_storeu_pd(lh + j, _mm256_castpd256_pd128(minus_sorted));
    _mm_storeu_pd(hh + j, _mm256_extractf128_pd(minus_sorted, 1));
  }
  if (j < half) {
    scalar::haar_analysis_rows(top + 2 * j, bottom + 2 * j, 2 * (half - j), ll + j, lh + j, hl + j,
                               hh + j);
  }
}

void haar_synthesis_rows(const double* ll, const double* lh, const double* hl, const double* hh,
                         std::size_t half_width, double* top, double* bottom) {
  const __m256d scale = _mm256_set1_pd(0.5);
  std::size_t j = 0;
  for (; j + 4 <= half_width; j += 4) {
    const __m256d vll = _mm256_loadu_pd(ll + j), vlh = _mm256_loadu_pd(lh + j);
    const __m256d vhl = _mm256_loadu_pd(hl + j), vhh = _mm256_loadu_pd(hh + j);
    const __m256d p = _mm256_add_pd(vll, vlh), q = _mm256_add_pd(vhl, vhh);
    const __m256d r = _mm256_sub_pd(vll, vlh), s = _mm256_sub_pd(vhl, vhh);
    const __m256d a = _mm256_mul_pd(_mm256_add_pd(p, q), scale);
    const __m256d b = _mm256_mul_pd(_mm256_sub_pd(p, q), scale);
    const __m256d c = _mm256_mul_pd(_mm256_add_pd(r, s), scale);
    const __m256d d = _mm256_mul_pd(_mm256_sub_pd(r, s), scale);
    // interleave [a0 b0 a1 b1 a2 b2 a3 b3]
    const __m256d ab_lo = _mm256_unpacklo_pd(a, b);  // [a0 b0 a2 b2]
    const __m256d ab_hi = _mm256_unpackhi_pd(a, b);  // [a1 b1 a3 b3]
    const __m256d cd_lo = _mm256_unpacklo_pd(c, d);
    const __m256d cd_hi = _mm256_unpackhi_pd(c, d);
    _mm256_storeu_pd(top + 2 * j, _mm256_permute2f128_pd(ab_lo, ab_hi, 0x20));
    _mm256_storeu_pd(top + 2 * j + 4, _mm256_permute2f128_pd(ab_lo, ab_hi, 0x31));
    _mm256_storeu_pd(bottom + 2 * j, _mm256_permute2f128_pd(cd_lo, cd_hi, 0x20));
    _mm256_storeu_pd(bottom + 2 * j + 4, _mm256_permute2f128_pd(cd_lo, cd_hi, 0x31));
  }
  if (j < half_width) {
    scalar::haar_synthesis_rows(ll + j, lh + j, hl + j, hh + j, half_width - j, top + 2 * j,
                                bottom + 2 * j);
  }
}

}  // namespace fdfm::kernels::avx2
