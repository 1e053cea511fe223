// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#include "compact/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "compact/errors.hpp"
#include "compact/kernels.hpp"

namespace compact {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double midpoint(double lo, double hi) {
  const double m = (lo + hi) / 2.0;
  return m > lo ? m : hi;
}

// Best stump found so far at one node. Candidates arrive in increasing
// (feature, threshold) order, so strict improvement implements the tie rules.
struct NodeBest {
  bool found = false;
  bool degenerate = true;
  std::uint32_t feature = 0;
  double threshold = -kInf;
  int polarity = 1;
  double edge = 0.0;

  void offer(std::uint32_t f, double thr, double total, double left, bool allow_degenerate) {
    const bool degen = std::isinf(thr);
    if (degen && !allow_degenerate) return;
    const double e = total - 2.0 * left;  // edge for polarity +1
    // polarity +1 first, then -1
    if (!found || e > edge) set(f, thr, 1, e, degen);
    if (-e > edge) set(f, thr, -1, -e, degen);
  }
  void set(std::uint32_t f, double thr, int p, double e, bool degen) {
    found = true;
    feature = f;
    threshold = thr;
    polarity = p;
    edge = e;
    degenerate = degen;
  }
};

}  // namespace

Tree::Tree(std::vector<Split> splits, std::vector<std::int8_t> leaves)
    : splits_(std::move(splits)), leaves_(std::move(leaves)) {
  int d = 0;
  while (d <= kMaxDepth && (std::size_t{1} << d) < leaves_.size()) ++d;
  if (d < 1 || d > kMaxDepth || (std::size_t{1} << d) != leaves_.size() ||
      splits_.size() != leaves_.size() - 1) {
    throw InvalidInput("tree must be full binary with depth 1.." + std::to_string(kMaxDepth));
  }
  depth_ = d;
  for (auto v : leaves_) {
    if (v != 1 && v != -1) throw InvalidInput("tree leaves must be -1 or +1");
  }
  for (const auto& s : splits_) {
    if (std::isnan(s.threshold)) throw InvalidInput("tree threshold is NaN");
    features_.push_back(s.feature);
  }
  std::sort(features_.begin(), features_.end());
  features_.erase(std::unique(features_.begin(), features_.end()), features_.end());
}

Tree Tree::stump(std::uint32_t feature, double threshold, int polarity) {
  if (polarity != 1 && polarity != -1) throw InvalidInput("stump polarity must be -1 or +1");
  return Tree({{feature, threshold}},
              {static_cast<std::int8_t>(-polarity), static_cast<std::int8_t>(polarity)});
}

double Tree::predict(std::span<const double> x) const {
  std::size_t node = 0;
  const std::size_t internal = splits_.size();
  while (node < internal) {
    const Split& s = splits_[node];
    node = 2 * node + (x[s.feature] >= s.threshold ? 2 : 1);
  }
  return leaves_[node - internal];
}

void Tree::predict_batch(const FeatureMatrix& x, std::span<double> out) const {
  if (out.size() != x.rows()) throw InvalidInput("predict_batch: output size mismatch");
  if (depth_ == 1) {
    kernels::threshold_select(x.column(splits_[0].feature), splits_[0].threshold, leaves_[0],
                              leaves_[1], out);
    return;
  }
  const std::size_t internal = splits_.size();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::size_t node = 0;
    while (node < internal) {
      const Split& s = splits_[node];
      node = 2 * node + (x.at(i, s.feature) >= s.threshold ? 2 : 1);
    }
    out[i] = leaves_[node - internal];
  }
}

Stump fit_stump(std::span<const double> values, std::span<const Label> labels,
                std::span<const double> weights) {
  if (values.size() != labels.size() || values.size() != weights.size()) {
    throw InvalidInput("fit_stump: length mismatch");
  }
  if (values.empty()) throw InvalidInput("fit_stump: empty input");
  const std::size_t n = values.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return values[a] < values[b]; });
  std::vector<double> yw(n);
  for (std::size_t i = 0; i < n; ++i) yw[i] = labels[i].sign() * weights[i];
  const double total = kernels::sum(yw);

  NodeBest best;
  best.offer(0, -kInf, total, 0.0, true);
  double left = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint32_t i = order[k];
    if (k > 0 && values[i] > values[order[k - 1]]) {
      best.offer(0, midpoint(values[order[k - 1]], values[i]), total, left, true);
    }
    left += yw[i];
  }
  best.offer(0, kInf, total, total, true);
  return {0, best.threshold, best.polarity, best.edge};
}

SortedColumns::SortedColumns(const FeatureMatrix& x) : rows_(x.rows()), order_(x.rows() * x.cols()) {
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto col = x.column(f);
    auto first = order_.begin() + static_cast<std::ptrdiff_t>(f * rows_);
    std::iota(first, first + static_cast<std::ptrdiff_t>(rows_), 0U);
    std::stable_sort(first, first + static_cast<std::ptrdiff_t>(rows_),
                     [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
  }
}

Tree fit_tree(const FeatureMatrix& x, const SortedColumns& sorted,
              std::span<const std::size_t> features, std::span<const double> signed_weights,
              int depth) {
  if (depth < 1 || depth > Tree::kMaxDepth) throw InvalidInput("fit_tree: depth out of range");
  if (features.empty()) throw InvalidInput("fit_tree: no candidate features");
  if (signed_weights.size() != x.rows()) throw InvalidInput("fit_tree: weight length mismatch");

  const std::size_t n = x.rows();
  const std::size_t internal = (std::size_t{1} << depth) - 1;
  std::vector<Split> splits(internal);
  int root_polarity = 1;
  std::vector<double> node_total(internal + internal + 1, 0.0);
  std::vector<std::size_t> node_count(internal + internal + 1, 0);
  std::vector<std::uint32_t> node_of(n, 0);  // current node of each example

  node_total[0] = kernels::sum(signed_weights);
  node_count[0] = n;

  for (int level = 0; level < depth; ++level) {
    const std::size_t first = (std::size_t{1} << level) - 1;
    const std::size_t width = std::size_t{1} << level;
    const bool has_children_below = level + 1 < depth;

    std::vector<NodeBest> best(width);
    std::vector<double> left(width);
    std::vector<double> last(width);
    std::vector<char> seen(width);

    auto scan = [&](bool allow_degenerate, std::size_t node_filter) {
      for (std::size_t f : features) {
        const auto fid = static_cast<std::uint32_t>(f);
        auto col = x.column(f);
        std::fill(left.begin(), left.end(), 0.0);
        std::fill(seen.begin(), seen.end(), 0);
        for (std::size_t k = 0; k < width; ++k) {
          if (node_filter != SIZE_MAX && k != node_filter) continue;
          if (node_count[first + k] > 0) {
            best[k].offer(fid, -kInf, node_total[first + k], 0.0, allow_degenerate);
          }
        }
        for (std::uint32_t i : sorted.order(f)) {
          const std::size_t k = node_of[i] - first;
          if (node_filter != SIZE_MAX && k != node_filter) continue;
          const double v = col[i];
          if (seen[k] && v > last[k]) {
            best[k].offer(fid, midpoint(last[k], v), node_total[first + k], left[k], allow_degenerate);
          }
          left[k] += signed_weights[i];
          last[k] = v;
          seen[k] = 1;
        }
        for (std::size_t k = 0; k < width; ++k) {
          if (node_filter != SIZE_MAX && k != node_filter) continue;
          if (node_count[first + k] > 0) {
            best[k].offer(fid, kInf, node_total[first + k], node_total[first + k],
                          allow_degenerate);
          }
        }
      }
    };

    scan(!has_children_below, SIZE_MAX);
    for (std::size_t k = 0; k < width; ++k) {
      // no feature separates this node's examples
      if (node_count[first + k] > 0 && !best[k].found) scan(true, k);
    }

    for (std::size_t k = 0; k < width; ++k) {
      const std::size_t node = first + k;
      if (node == 0) {
        splits[0] = {best[0].feature, best[0].threshold};
        root_polarity = best[0].polarity;
      } else if (node_count[node] == 0 || best[k].degenerate) {
        splits[node] = {splits[(node - 1) / 2].feature, -kInf};
      } else {
        splits[node] = {best[k].feature, best[k].threshold};
      }
    }

    // route examples to children and accumulate child totals
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t node = node_of[i];
      const Split& s = splits[node];
      const std::size_t child = 2 * node + (x.at(i, s.feature) >= s.threshold ? 2 : 1);
      node_of[i] = static_cast<std::uint32_t>(child);
      node_total[child] += signed_weights[i];
      ++node_count[child];
    }
  }

  std::vector<std::int8_t> leaves(internal + 1);
  if (depth == 1) {
    leaves[0] = static_cast<std::int8_t>(-root_polarity);
    leaves[1] = static_cast<std::int8_t>(root_polarity);
  } else {
    for (std::size_t j = 0; j <= internal; ++j) {
      std::size_t node = internal + j;
      while (node_count[node] == 0) node = (node - 1) / 2;  // root is never empty
      leaves[j] = node_total[node] >= 0.0 ? 1 : -1;
    }
  }
  return Tree(std::move(splits), std::move(leaves));
}

Tree fit_tree(const FeatureMatrix& x, std::span<const Label> labels, std::span<const double> weights,
              int depth) {
  if (labels.size() != x.rows() || weights.size() != x.rows()) {
    throw InvalidInput("fit_tree: length mismatch");
  }
  std::vector<double> yw(x.rows());
  for (std::size_t i = 0; i < yw.size(); ++i) yw[i] = labels[i].sign() * weights[i];
  std::vector<std::size_t> features(x.cols());
  std::iota(features.begin(), features.end(), std::size_t{0});
  return fit_tree(x, SortedColumns(x), features, yw, depth);
}

}  // namespace compact
