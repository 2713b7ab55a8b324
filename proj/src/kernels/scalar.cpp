// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "kernels_impl.hpp"

namespace fdfm::kernels::scalar {

void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scaled_diff(double a, const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * (x[i] - y[i]);
}

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double squared_distance(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

void haar_analysis_rows(const double* top, const double* bottom, std::size_t width, double* ll,
                        double* lh, double* hl, double* hh) {
  for (std::size_t j = 0; j < width / 2; ++j) {
    const double a = top[2 * j], b = top[2 * j + 1];
    const double c = bottom[2 * j], d = bottom[2 * j + 1];
    const double s_top = a + b, s_bot = c + d;
    const double d_top = a - b, d_bot = c - d;
    ll[j] = (s_top + s_bot) * 0.5;
    lh[j] = (s_top - s_bot) * 0.5;
    hl[j] = (d_top + d_bot) * 0.5;
    hh[j] = (d_top - d_bot) * 0.5;
  }
}

void haar_synthesis_rows(const double* ll, const double* lh, const double* hl, const double* hh,
                         std::size_t half_width, double* top, double* bottom) {
  for (std::size_t j = 0; j < half_width; ++j) {
    const double p = ll[j] + lh[j], q = hl[j] + hh[j];
    const double r = ll[j] - lh[j], s = hl[j] - hh[j];
    top[2 * j] = (p + q) * 0.5;
    top[2 * j + 1] = (p - q) * 0.5;
    bottom[2 * j] = (r + s) * 0.5;
    bottom[2 * j + 1] = (r - s) * 0.5;
  }
}

}  // namespace fdfm::kernels::scalar
