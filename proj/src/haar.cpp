// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/haar.hpp"

#include <cmath>

#include "fdfm/errors.hpp"
#include "fdfm/kernels.hpp"

namespace fdfm {

FreqState dwt2(const Pixels& x) {
  for (double v : x.values()) {
    if (!std::isfinite(v)) throw DomainError("dwt2: input contains non-finite values");
  }
  const std::size_t channels = x.channels(), height = x.height(), width = x.width();
  const std::size_t half_h = height / 2, half_w = width / 2;
  const std::size_t plane = half_h * half_w;
  FreqState out = FreqState::zeros(channels, height, width);
  const auto& k = kernels::active();
  const double* src = x.values().data();
  for (std::size_t c = 0; c < channels; ++c) {
    double* ll = out.low.data() + c * plane;
    double* lh = out.high.data() + c * plane;
    double* hl = out.high.data() + (channels + c) * plane;
    double* hh = out.high.data() + (2 * channels + c) * plane;
    for (std::size_t i = 0; i < half_h; ++i) {
      const double* top = src + (c * height + 2 * i) * width;
      k.haar_analysis_rows(top, top + width, width, ll + i * half_w, lh + i * half_w,
                           hl + i * half_w, hh + i * half_w);
    }
  }
  return out;
}

FreqState dwt2(const Tensor& x) { return dwt2(Pixels(x)); }

Pixels idwt2(const FreqState& s) {
  if (s.low.rank() != 3 || s.high.rank() != 3) {
    throw DimensionError("idwt2: bands must have rank 3");
  }
  const std::size_t channels = s.low.dim(0), half_h = s.low.dim(1), half_w = s.low.dim(2);
  if (s.high.shape() != Shape{3 * channels, half_h, half_w} || channels == 0 || half_h == 0 ||
      half_w == 0) {
    throw DimensionError("idwt2: high band " + shape_string(s.high.shape()) +
                         " inconsistent with low band " + shape_string(s.low.shape()));
  }
  const std::size_t height = 2 * half_h, width = 2 * half_w, plane = half_h * half_w;
  Pixels out(channels, height, width);
  const auto& k = kernels::active();
  double* dst = out.values().data();
  for (std::size_t c = 0; c < channels; ++c) {
    const double* ll = s.low.data() + c * plane;
    const double* lh = s.high.data() + c * plane;
    const double* hl = s.high.data() + (channels + c) * plane;
    const double* hh = s.high.data() + (2 * channels + c) * plane;
    for (std::size_t i = 0; i < half_h; ++i) {
      double* top = dst + (c * height + 2 * i) * width;
      k.haar_synthesis_rows(ll + i * half_w, lh + i * half_w, hl + i * half_w, hh + i * half_w,
                            half_w, top, top + width);
    }
  }
  return out;
}

}  // namespace fdfm
