// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "fdfm/errors.hpp"
#include "fdfm/kernels.hpp"

namespace fdfm {

std::size_t element_count(const Shape& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), values_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != element_count(shape_)) {
    throw DimensionError("tensor of shape " + shape_string(shape_) + " needs " +
                         std::to_string(element_count(shape_)) + " values, got " +
                         std::to_string(values_.size()));
  }
}

namespace {

void check_image_sides(std::size_t channels, std::size_t height, std::size_t width) {
  if (channels == 0 || height < 2 || width < 2 || height % 2 != 0 || width % 2 != 0) {
    throw DimensionError("image shape " + shape_string({channels, height, width}) +
                         " needs C >= 1 and even H, W >= 2");
  }
}

}  // namespace

Pixels::Pixels(std::size_t channels, std::size_t height, std::size_t width, double fill)
    : channels_(channels), height_(height), width_(width) {
  check_image_sides(channels, height, width);
  tensor_ = Tensor({channels, height, width}, fill);
}

Pixels::Pixels(Tensor tensor) {
  if (tensor.rank() != 3) {
    throw DimensionError("image tensor must have rank 3, got shape " +
                         shape_string(tensor.shape()));
  }
  check_image_sides(tensor.dim(0), tensor.dim(1), tensor.dim(2));
  channels_ = tensor.dim(0);
  height_ = tensor.dim(1);
  width_ = tensor.dim(2);
  tensor_ = std::move(tensor);
}

FreqState FreqState::zeros(std::size_t channels, std::size_t height, std::size_t width) {
  check_image_sides(channels, height, width);
  return {Tensor({channels, height / 2, width / 2}), Tensor({3 * channels, height / 2, width / 2})};
}

FreqState FreqState::zeros_like(const FreqState& other) {
  return {Tensor(other.low.shape()), Tensor(other.high.shape())};
}

std::vector<double> FreqState::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  out.insert(out.end(), low.values().begin(), low.values().end());
  out.insert(out.end(), high.values().begin(), high.values().end());
  return out;
}

FreqState FreqState::unflatten(std::span<const double> flat, const FreqState& like) {
  if (flat.size() != like.size()) {
    throw DimensionError("flat state of length " + std::to_string(flat.size()) +
                         " does not match band sizes " + std::to_string(like.size()));
  }
  const auto split = flat.begin() + static_cast<std::ptrdiff_t>(like.low.size());
  return {Tensor(like.low.shape(), std::vector<double>(flat.begin(), split)),
          Tensor(like.high.shape(), std::vector<double>(split, flat.end()))};
}

void require_same_shape(const FreqState& a, const FreqState& b, const char* what) {
  if (a.low.shape() != b.low.shape() || a.high.shape() != b.high.shape()) {
    throw DimensionError(std::string(what) + ": band shapes " + shape_string(a.low.shape()) +
                         "/" + shape_string(a.high.shape()) + " vs " +
                         shape_string(b.low.shape()) + "/" + shape_string(b.high.shape()));
  }
}

void require_same_shape(const Pixels& a, const Pixels& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": image shapes " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

double squared_norm(std::span<const double> v) noexcept {
  return kernels::active().dot(v.data(), v.data(), v.size());
}

double squared_norm(const FreqState& s) noexcept {
  return squared_norm(s.low.values()) + squared_norm(s.high.values());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("max_abs_diff: length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double max_abs_diff(const FreqState& a, const FreqState& b) {
  require_same_shape(a, b, "max_abs_diff");
  return std::max(max_abs_diff(a.low.values(), b.low.values()),
                  max_abs_diff(a.high.values(), b.high.values()));
}

FreqState axpby(double a, const FreqState& x, double b, const FreqState& y) {
  require_same_shape(x, y, "axpby");
  FreqState out = FreqState::zeros_like(x);
  const auto& k = kernels::active();
  k.axpby(a, x.low.data(), b, y.low.data(), out.low.data(), x.low.size());
  k.axpby(a, x.high.data(), b, y.high.data(), out.high.data(), x.high.size());
  return out;
}

Pixels axpby(double a, const Pixels& x, double b, const Pixels& y) {
  require_same_shape(x, y, "axpby");
  Pixels out(x.channels(), x.height(), x.width());
  kernels::active().axpby(a, x.values().data(), b, y.values().data(), out.values().data(),
                          x.size());
  return out;
}

}  // namespace fdfm
