// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "compact/core.hpp"
#include "compact/pool.hpp"

namespace compact {

struct Example {
  std::string id;
  Label label = Label::positive();
  std::vector<double> features;  ///< indexed by global feature id
};

/// Labeled examples sharing one manifest. Construction validates feature
/// counts and finiteness.
class Dataset {
 public:
  Dataset(std::vector<Example> examples, std::shared_ptr<const FamilyManifest> manifest);

  const std::vector<Example>& examples() const { return examples_; }
  const FamilyManifest& manifest() const { return *manifest_; }
  const std::shared_ptr<const FamilyManifest>& manifest_ptr() const { return manifest_; }
  std::size_t size() const { return examples_.size(); }
  const Example& operator[](std::size_t i) const { return examples_[i]; }

  std::size_t count(Label label) const;
  std::vector<Label> labels() const;

 private:
  std::vector<Example> examples_;
  std::shared_ptr<const FamilyManifest> manifest_;
};

/// Column-major copy of a dataset's features for the training loops.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(std::span<const Example> examples, std::size_t features);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> column(std::size_t f) const {
    return {data_.data() + f * rows_, rows_};
  }
  double at(std::size_t row, std::size_t f) const { return data_[f * rows_ + row]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// CSV with header `id,label,f0,...,fK`. Throws SchemaError naming line/column.
Dataset parse_dataset_csv(std::string_view text, std::shared_ptr<const FamilyManifest> manifest);
std::string dataset_to_csv(const Dataset& data);

}  // namespace compact
