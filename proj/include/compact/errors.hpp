// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <stdexcept>
#include <string>

namespace compact {

/// Malformed arguments to a numerical routine (length mismatch, non-finite value, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A manifest, model or config document that violates its schema. The message
/// names the offending field as a path, e.g. `stages[3].threshold`.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Training setup that cannot produce a model (single-class data, empty pool, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace compact
