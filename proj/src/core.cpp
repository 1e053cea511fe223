// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#include "compact/core.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "compact/kernels.hpp"

namespace compact {

Label Label::from_int(int v) {
  if (v == 1) return positive();
  if (v == -1) return negative();
  throw InvalidInput("label must be -1 or +1, got " + std::to_string(v));
}

double exp_weight(Label label, double score) {
  if (!std::isfinite(score)) throw InvalidInput("exp_weight: non-finite score");
  return std::exp(-label.sign() * score);
}

namespace {
void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InvalidInput(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                       std::to_string(b) + ")");
  }
  if (a == 0) throw InvalidInput(std::string(what) + ": empty input");
}
}  // namespace

double empirical_risk(std::span<const Label> labels, std::span<const double> scores) {
  check_lengths(labels.size(), scores.size(), "empirical_risk");
  std::vector<double> w(labels.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = exp_weight(labels[i], scores[i]);
  return kernels::sum(w) / static_cast<double>(w.size());
}

double complexity_margin(Label label, double omega) {
  if (!(omega >= 0.0)) throw InvalidInput("complexity_margin: omega must be >= 0");
  return label.sign() * omega;
}

double complexity_loss_value(const ComplexityLoss& loss, double v) {
  switch (loss.kind) {
    case ComplexityLossKind::Hinge:
      return v < 0.0 ? -v : 0.0;
  }
  return 0.0;
}

double psi_weight(const ComplexityLoss& loss, Label label, double omega) {
  if (!(omega >= 0.0)) throw InvalidInput("psi_weight: omega must be >= 0");
  switch (loss.kind) {
    case ComplexityLossKind::Hinge:
      // tau'(v) = -1 for v <= 0 (left derivative at the kink), 0 for v > 0.
      // The margin of a negative is -omega <= 0; of a positive, omega >= 0, and
      // positives are never charged, including at omega == 0.
      return label.is_positive() ? 0.0 : 1.0;
  }
  return 0.0;
}

double complexity_risk(std::span<const Label> labels, std::span<const double> omegas,
                       const ComplexityLoss& loss) {
  check_lengths(labels.size(), omegas.size(), "complexity_risk");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total += complexity_loss_value(loss, complexity_margin(labels[i], omegas[i]));
  }
  return total / static_cast<double>(labels.size());
}

double lagrangian(double risk_e, double risk_c, const LagrangianConfig& cfg) {
  return risk_e + cfg.eta * risk_c;
}

}  // namespace compact
