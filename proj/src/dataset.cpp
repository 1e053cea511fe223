// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#include "compact/dataset.hpp"

#include <cmath>

#include "compact/csv.hpp"
#include "compact/errors.hpp"

namespace compact {

Dataset::Dataset(std::vector<Example> examples, std::shared_ptr<const FamilyManifest> manifest)
    : examples_(std::move(examples)), manifest_(std::move(manifest)) {
  if (!manifest_) throw InvalidInput("dataset requires a manifest");
  if (examples_.empty()) throw InvalidInput("dataset is empty");
  const std::size_t k = manifest_->total_features();
  for (const auto& ex : examples_) {
    if (ex.features.size() != k) {
      throw InvalidInput("example '" + ex.id + "' has " + std::to_string(ex.features.size()) +
                         " features, manifest declares " + std::to_string(k));
    }
    for (double v : ex.features) {
      if (!std::isfinite(v)) throw InvalidInput("example '" + ex.id + "' has a non-finite feature");
    }
  }
}

std::size_t Dataset::count(Label label) const {
  std::size_t n = 0;
  for (const auto& ex : examples_) n += ex.label == label;
  return n;
}

std::vector<Label> Dataset::labels() const {
  std::vector<Label> out;
  out.reserve(examples_.size());
  for (const auto& ex : examples_) out.push_back(ex.label);
  return out;
}

FeatureMatrix::FeatureMatrix(std::span<const Example> examples, std::size_t features)
    : rows_(examples.size()), cols_(features), data_(rows_ * cols_) {
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t f = 0; f < cols_; ++f) data_[f * rows_ + i] = examples[i].features[f];
  }
}

Dataset parse_dataset_csv(std::string_view text, std::shared_ptr<const FamilyManifest> manifest) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw SchemaError("line 1", "missing header");
  const auto& header = rows.front();
  const std::size_t k = manifest->total_features();
  if (header.size() != k + 2 || header[0] != "id" || header[1] != "label") {
    throw SchemaError("line 1", "expected header id,label,f0..f" + std::to_string(k ? k - 1 : 0) +
                                    " (" + std::to_string(k + 2) + " columns), got " +
                                    std::to_string(header.size()) + " columns");
  }
  for (std::size_t f = 0; f < k; ++f) {
    if (header[f + 2] != "f" + std::to_string(f)) {
      throw SchemaError("line 1, column " + std::to_string(f + 3),
                        "expected 'f" + std::to_string(f) + "'");
    }
  }
  std::vector<Example> examples;
  examples.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "line " + std::to_string(r + 1);
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != k + 2) {
      throw SchemaError(where, "expected " + std::to_string(k + 2) + " columns, got " +
                                   std::to_string(row.size()));
    }
    Example ex;
    ex.id = row[0];
    try {
      const double lab = csv::parse_double(row[1]);
      if (lab != 1.0 && lab != -1.0) throw InvalidInput("label must be -1 or 1");
      ex.label = Label::from_int(static_cast<int>(lab));
      ex.features.resize(k);
      for (std::size_t f = 0; f < k; ++f) ex.features[f] = csv::parse_double(row[f + 2]);
    } catch (const InvalidInput& e) {
      throw SchemaError(where, e.what());
    }
    examples.push_back(std::move(ex));
  }
  return Dataset(std::move(examples), std::move(manifest));
}

std::string dataset_to_csv(const Dataset& data) {
  const std::size_t k = data.manifest().total_features();
  csv::Row header{"id", "label"};
  for (std::size_t f = 0; f < k; ++f) header.push_back("f" + std::to_string(f));
  std::string out = csv::format_row(header) + "\n";
  for (const auto& ex : data.examples()) {
    out += csv::escape(ex.id);
    out += ex.label.is_positive() ? ",1" : ",-1";
    for (double v : ex.features) {
      out.push_back(',');
      out += csv::format_double(v);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace compact
