// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace fdfm::kernels {

namespace scalar {
void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scaled_diff(double a, const double* x, const double* y, double* out, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double squared_distance(const double* x, const double* y, std::size_t n);
void haar_analysis_rows(const double* top, const double* bottom, std::size_t width, double* ll,
                        double* lh, double* hl, double* hh);
void haar_synthesis_rows(const double* ll, const double* lh, const double* hl, const double* hh,
                         std::size_t half_width, double* top, double* bottom);
}  // namespace scalar

#if defined(FDFM_HAVE_AVX2)
namespace avx2 {
void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scaled_diff(double a, const double* x, const double* y, double* out, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double squared_distance(const double* x, const double* y, std::size_t n);
void haar_analysis_rows(const double* top, const double* bottom, std::size_t width, double* ll,
                        double* lh, double* hl, double* hh);
void haar_synthesis_rows(const double* ll, const double* lh, const double* hl, const double* hh,
                         std::size_t half_width, double* top, double* bottom);
}  // namespace avx2
#endif

}  // namespace fdfm::kernels
