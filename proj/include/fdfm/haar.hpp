// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "fdfm/tensor.hpp"

namespace fdfm {

/// Single-level orthonormal 2D Haar analysis. For each 2x2 block
///   [[a, b],
///    [c, d]]
/// of every channel:
///   LL = (a + b + c + d) / 2
///   LH = (a + b - c - d) / 2   (top row minus bottom row)
///   HL = (a - b + c - d) / 2   (left column minus right column)
///   HH = (a - b - c + d) / 2
/// The transform is orthogonal, so energy is preserved exactly up to rounding.
FreqState dwt2(const Pixels& x);
/// Same, for a raw (C, H, W) tensor. Throws DimensionError on odd sides.
FreqState dwt2(const Tensor& x);

/// Exact inverse of dwt2. Throws DimensionError on inconsistent band shapes.
Pixels idwt2(const FreqState& s);

}  // namespace fdfm
