// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#include "fdfm/tabular.hpp"

#include <cmath>

#include "fdfm/errors.hpp"

namespace fdfm {

void CellGrid::validate() const {
  if (bins.empty() || bins.size() > 2 || lo.size() != bins.size() || hi.size() != bins.size()) {
    throw DimensionError("tabular grids support 1 or 2 dimensions");
  }
  for (std::size_t d = 0; d < bins.size(); ++d) {
    if (bins[d] == 0 || !(lo[d] < hi[d])) {
      throw DimensionError("tabular grid axis needs bins >= 1 and lo < hi");
    }
  }
}

std::size_t CellGrid::cell_count() const noexcept {
  std::size_t n = 1;
  for (std::size_t b : bins) n *= b;
  return n;
}

std::optional<std::size_t> CellGrid::cell_of(std::span<const double> point) const {
  std::size_t index = 0;
  for (std::size_t d = 0; d < dims(); ++d) {
    const double x = point[d];
    if (!(x >= lo[d] && x < hi[d])) return std::nullopt;
    auto b = static_cast<std::size_t>((x - lo[d]) / (hi[d] - lo[d]) * static_cast<double>(bins[d]));
    if (b >= bins[d]) b = bins[d] - 1;
    index = index * bins[d] + b;
  }
  return index;
}

namespace {

std::vector<std::size_t> unravel(const CellGrid& g, std::size_t cell) {
  std::vector<std::size_t> idx(g.dims());
  for (std::size_t d = g.dims(); d-- > 0;) {
    idx[d] = cell % g.bins[d];
    cell /= g.bins[d];
  }
  return idx;
}

std::vector<double> cell_point(const CellGrid& g, std::size_t cell, double frac) {
  const auto idx = unravel(g, cell);
  std::vector<double> p(g.dims());
  for (std::size_t d = 0; d < g.dims(); ++d) {
    const double width = (g.hi[d] - g.lo[d]) / static_cast<double>(g.bins[d]);
    p[d] = g.lo[d] + (static_cast<double>(idx[d]) + frac) * width;
  }
  return p;
}

}  // namespace

std::vector<double> CellGrid::cell_center(std::size_t cell) const {
  return cell_point(*this, cell, 0.5);
}
std::vector<double> CellGrid::cell_lower(std::size_t cell) const {
  return cell_point(*this, cell, 0.0);
}
std::vector<double> CellGrid::cell_upper(std::size_t cell) const {
  return cell_point(*this, cell, 1.0);
}

std::optional<double> TabularModel::value_at(std::span<const double> point) const {
  const auto cell = grid.cell_of(point);
  if (!cell || !defined(*cell)) return std::nullopt;
  return value[*cell];
}

TabularModel tabular_predictor_fit(const CellGrid& grid, std::span<const TabularSample> samples) {
  grid.validate();
  TabularModel m;
  m.grid = grid;
  const std::size_t cells = grid.cell_count();
  std::vector<double> weighted_sum(cells, 0.0);
  m.weight_sum.assign(cells, 0.0);
  m.count.assign(cells, 0);
  for (const auto& s : samples) {
    if (!(s.weight >= 0.0) || !std::isfinite(s.target)) {
      throw DomainError("tabular samples need finite targets and non-negative weights");
    }
    const auto cell = grid.cell_of(std::span<const double>(s.input.data(), grid.dims()));
    if (!cell) continue;
    weighted_sum[*cell] += s.weight * s.target;
    m.weight_sum[*cell] += s.weight;
    ++m.count[*cell];
  }
  m.value.assign(cells, 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    if (m.defined(c)) m.value[c] = weighted_sum[c] / m.weight_sum[c];
  }
  return m;
}

}  // namespace fdfm
