// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fdfm {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape) noexcept;
std::string shape_string(const Shape& shape);

/// Dense row-major tensor of 64-bit floats.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  /// Throws DimensionError when `values.size()` does not match the shape.
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

/// Raw image state (C, H, W); H and W even and at least 2.
class Pixels {
 public:
  Pixels() = default;
  Pixels(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0);
  /// Validates rank and even sides; throws DimensionError otherwise.
  explicit Pixels(Tensor tensor);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return tensor_.size(); }
  Shape shape() const { return {channels_, height_, width_}; }

  double& at(std::size_t c, std::size_t y, std::size_t x) noexcept {
    return tensor_[(c * height_ + y) * width_ + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return tensor_[(c * height_ + y) * width_ + x];
  }

  std::span<double> values() noexcept { return tensor_.values(); }
  std::span<const double> values() const noexcept { return tensor_.values(); }
  const Tensor& tensor() const noexcept { return tensor_; }

  friend bool operator==(const Pixels&, const Pixels&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  Tensor tensor_;
};

/// Wavelet-domain state: low band (C, H/2, W/2) and high band (3C, H/2, W/2).
/// High-band channels are grouped by sub-band: [LH(c0..), HL(c0..), HH(c0..)].
struct FreqState {
  Tensor low;
  Tensor high;

  /// Zero state matching a (C, H, W) image.
  static FreqState zeros(std::size_t channels, std::size_t height, std::size_t width);
  static FreqState zeros_like(const FreqState& other);

  std::size_t channels() const { return low.dim(0); }
  std::size_t size() const noexcept { return low.size() + high.size(); }

  /// Low band followed by high band, both row-major.
  std::vector<double> flatten() const;
  /// Inverse of flatten() for a state shaped like `like`.
  static FreqState unflatten(std::span<const double> flat, const FreqState& like);

  friend bool operator==(const FreqState&, const FreqState&) = default;
};

/// Throws DimensionError unless the two states have identical band shapes.
void require_same_shape(const FreqState& a, const FreqState& b, const char* what);
void require_same_shape(const Pixels& a, const Pixels& b, const char* what);

double squared_norm(std::span<const double> v) noexcept;
double squared_norm(const FreqState& s) noexcept;
double max_abs_diff(std::span<const double> a, std::span<const double> b);
double max_abs_diff(const FreqState& a, const FreqState& b);

/// out = a * x + b * y, bandwise. Shapes must agree.
FreqState axpby(double a, const FreqState& x, double b, const FreqState& y);
Pixels axpby(double a, const Pixels& x, double b, const Pixels& y);

}  // namespace fdfm
