// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "fdfm/errors.hpp"

namespace fdfm {

namespace {

constexpr char kMagic[5] = {'F', 'P', 'X', 'T', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(bytes[offset + static_cast<std::size_t>(i)]) << (8 * i);
  }
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.rank() > std::numeric_limits<std::uint8_t>::max()) {
    throw IoError("tensor rank " + std::to_string(t.rank()) + " does not fit in FPXT1");
  }
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.reserve(6 + 4 * t.rank() + 8 * t.size());
  out.push_back(static_cast<std::uint8_t>(t.rank()));
  for (std::size_t d : t.shape()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) {
      throw IoError("tensor dimension " + std::to_string(d) + " does not fit in u32");
    }
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  for (double v : t.values()) put_f64(out, v);
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6 || std::memcmp(bytes.data(), kMagic, 5) != 0) {
    throw IoError("not an FPXT1 tensor (bad magic)");
  }
  const std::size_t rank = bytes[5];
  std::size_t offset = 6;
  if (bytes.size() < offset + 4 * rank) throw IoError("FPXT1 header truncated");
  Shape shape(rank);
  for (std::size_t i = 0; i < rank; ++i, offset += 4) {
    shape[i] = static_cast<std::size_t>(get_le(bytes, offset, 4));
  }
  const std::size_t count = element_count(shape);
  if (bytes.size() != offset + 8 * count) {
    throw IoError("FPXT1 payload holds " + std::to_string(bytes.size() - offset) +
                  " bytes, shape " + shape_string(shape) + " needs " + std::to_string(8 * count));
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i, offset += 8) {
    values[i] = std::bit_cast<double>(get_le(bytes, offset, 8));
  }
  return Tensor(std::move(shape), std::move(values));
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  const auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_tensor(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

Tensor stack_images(std::span<const Pixels> images, const Shape& shape) {
  if (shape.size() != 3) throw DimensionError("stack_images needs a (C, H, W) shape");
  Shape batch_shape{images.size(), shape[0], shape[1], shape[2]};
  std::vector<double> values;
  values.reserve(element_count(batch_shape));
  for (const auto& img : images) {
    if (img.shape() != shape) {
      throw DimensionError("stack_images: image " + shape_string(img.shape()) + " vs " +
                           shape_string(shape));
    }
    values.insert(values.end(), img.values().begin(), img.values().end());
  }
  return Tensor(std::move(batch_shape), std::move(values));
}

std::vector<Pixels> unstack_images(const Tensor& batch) {
  if (batch.rank() != 4) throw DimensionError("image batch must be rank 4");
  const std::size_t per = batch.dim(1) * batch.dim(2) * batch.dim(3);
  std::vector<Pixels> out;
  out.reserve(batch.dim(0));
  for (std::size_t n = 0; n < batch.dim(0); ++n) {
    const auto first = batch.values().begin() + static_cast<std::ptrdiff_t>(n * per);
    out.emplace_back(Tensor({batch.dim(1), batch.dim(2), batch.dim(3)},
                            std::vector<double>(first, first + static_cast<std::ptrdiff_t>(per))));
  }
  return out;
}

}  // namespace fdfm
