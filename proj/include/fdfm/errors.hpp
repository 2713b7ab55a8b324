// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdfm {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes do not fit together (odd image sides, band mismatch, width mismatch).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A configuration value violates its declared range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// x-prediction to velocity conversion requested where 1 - g(t) vanishes.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an API contract that cannot be expressed in types (e.g. stale tape).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Monte-Carlo estimate with no effective samples in the kernel window.
class UndefinedEstimateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss during training. Carries the offending batch indices.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::vector<std::size_t> indices)
      : Error(what), indices_(std::move(indices)) {}
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

}  // namespace fdfm
