// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fdfm/tensor.hpp"

// FPXT1 tensor files:
//   bytes 0..4   magic "FPXT1"
//   byte  5      rank (u8)
//   then         rank x u32 little-endian dims
//   then         row-major little-endian IEEE-754 binary64 values
//
// Image batches are stored as (N, C, H, W); frequency bands as
// (C, H/2, W/2) for the low band and (3C, H/2, W/2) for the high band with
// sub-band channel order LH, HL, HH.

namespace fdfm {

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
/// Throws IoError on bad magic, truncation or trailing bytes.
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

/// Stack equally shaped images into a (N, C, H, W) tensor. `shape` gives
/// (C, H, W) so that an empty batch still has a well-defined rank-4 shape.
Tensor stack_images(std::span<const Pixels> images, const Shape& shape);
std::vector<Pixels> unstack_images(const Tensor& batch);

}  // namespace fdfm
