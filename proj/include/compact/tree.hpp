// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
// Binary weak learners: decision stumps and full binary trees of bounded depth
// with {-1, +1} leaves.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "compact/core.hpp"
#include "compact/dataset.hpp"

namespace compact {

struct Split {
  std::uint32_t feature = 0;
  /// Examples with x[feature] >= threshold go right. May be -inf (all right)
  /// or +inf (all left).
  double threshold = 0.0;
  friend bool operator==(const Split&, const Split&) = default;
};

/// Full binary tree in heap order: node i has children 2i+1 (left) and 2i+2
/// (right); leaf j sits below internal node (2^depth - 1 + j - 1) / 2.
class Tree {
 public:
  static constexpr int kMaxDepth = 10;

  /// Throws InvalidInput unless splits/leaves form a full tree of depth 1..kMaxDepth.
  Tree(std::vector<Split> splits, std::vector<std::int8_t> leaves);
  /// polarity if x[feature] >= threshold, else -polarity.
  static Tree stump(std::uint32_t feature, double threshold, int polarity);

  int depth() const { return depth_; }
  const std::vector<Split>& splits() const { return splits_; }
  const std::vector<std::int8_t>& leaves() const { return leaves_; }

  double predict(std::span<const double> x) const;
  /// Outputs for every row of `x`.
  void predict_batch(const FeatureMatrix& x, std::span<double> out) const;

  /// Sorted, deduplicated feature ids referenced by the internal nodes.
  const std::vector<std::size_t>& distinct_features() const { return features_; }
  std::size_t lowest_feature() const { return features_.front(); }

  friend bool operator==(const Tree& a, const Tree& b) {
    return a.splits_ == b.splits_ && a.leaves_ == b.leaves_;
  }

 private:
  int depth_ = 1;
  std::vector<Split> splits_;
  std::vector<std::int8_t> leaves_;
  std::vector<std::size_t> features_;
};

struct Stump {
  std::uint32_t feature = 0;
  double threshold = 0.0;
  int polarity = 1;
  /// sum_i y_i w_i g(x_i) at the chosen split.
  double edge = 0.0;

  Tree to_tree() const { return Tree::stump(feature, threshold, polarity); }
};

/// Best single-feature stump by weighted edge over thresholds {-inf, midpoints
/// of sorted distinct values, +inf} and both polarities. Ties go to the lowest
/// threshold, then polarity +1. `feature` of the result is 0.
Stump fit_stump(std::span<const double> values, std::span<const Label> labels,
                std::span<const double> weights);

/// Per-feature ascending sort order of a matrix, computed once per training set.
class SortedColumns {
 public:
  explicit SortedColumns(const FeatureMatrix& x);
  std::span<const std::uint32_t> order(std::size_t feature) const {
    return {order_.data() + feature * rows_, rows_};
  }

 private:
  std::size_t rows_;
  std::vector<std::uint32_t> order_;
};

/// Greedy top-down tree over `features` (ascending ids), built level by level.
/// Each internal node takes the best stump on its examples (ties: lowest
/// feature id, then lowest threshold, then polarity +1). Nodes with children
/// below them only consider real splits, falling back to a non-splitting node
/// when no feature separates their examples. Non-root nodes that do not split
/// reuse their parent's feature so they add no cost. Leaves output the sign
/// of their weighted label sum (ties +1; empty leaves take their parent's
/// majority). At depth 1 the result is exactly the best fit_stump.
///
/// `signed_weights[i]` is y_i * w_i.
Tree fit_tree(const FeatureMatrix& x, const SortedColumns& sorted,
              std::span<const std::size_t> features, std::span<const double> signed_weights,
              int depth);

/// Convenience overload over all features.
Tree fit_tree(const FeatureMatrix& x, std::span<const Label> labels, std::span<const double> weights,
              int depth);

}  // namespace compact
