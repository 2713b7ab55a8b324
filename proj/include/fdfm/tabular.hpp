// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fdfm {

/// Uniform partition of a 1-D or 2-D box into half-open cells.
struct CellGrid {
  std::vector<double> lo;
  std::vector<std::size_t> bins;
  std::vector<double> hi;

  static CellGrid line(double lo, double hi, std::size_t bins) { return {{lo}, {bins}, {hi}}; }
  static CellGrid plane(std::array<double, 2> lo, std::array<double, 2> hi,
                        std::array<std::size_t, 2> bins) {
    return {{lo[0], lo[1]}, {bins[0], bins[1]}, {hi[0], hi[1]}};
  }

  /// Throws DimensionError unless 1 or 2 dims with positive bins and lo < hi.
  void validate() const;
  std::size_t dims() const noexcept { return bins.size(); }
  std::size_t cell_count() const noexcept;
  /// Row-major cell index, or nullopt outside the box.
  std::optional<std::size_t> cell_of(std::span<const double> point) const;
  std::vector<double> cell_center(std::size_t cell) const;
  std::vector<double> cell_lower(std::size_t cell) const;
  std::vector<double> cell_upper(std::size_t cell) const;
};

/// One regression sample. Only the first grid.dims() input entries are used.
struct TabularSample {
  std::array<double, 2> input{};
  double target = 0.0;
  double weight = 1.0;
};

/// Piecewise-constant least-squares fit. Cells with no samples are undefined.
struct TabularModel {
  CellGrid grid;
  std::vector<double> value;
  std::vector<double> weight_sum;
  std::vector<std::size_t> count;

  bool defined(std::size_t cell) const { return count.at(cell) > 0 && weight_sum[cell] > 0.0; }
  std::optional<double> value_at(std::span<const double> point) const;
};

/// Minimizes sum_i w_i (f(cell(x_i)) - y_i)^2 over piecewise-constant f: each
/// defined cell holds the weighted sample mean of its targets.
TabularModel tabular_predictor_fit(const CellGrid& grid, std::span<const TabularSample> samples);

}  // namespace fdfm
