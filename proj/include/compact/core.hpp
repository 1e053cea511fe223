// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
// Risk and loss arithmetic shared by the trainer and the cascade evaluator:
// exponential-loss weights, empirical risk, complexity margins and the
// accuracy/complexity Lagrangian.
#pragma once

#include <cstdint>
#include <span>

#include "compact/errors.hpp"

namespace compact {

/// Binary class label. Only -1 and +1 are representable.
class Label {
 public:
  static constexpr Label positive() { return Label(1); }
  static constexpr Label negative() { return Label(-1); }

  /// Throws InvalidInput for anything other than -1 or +1.
  static Label from_int(int v);

  constexpr int value() const { return v_; }
  constexpr double sign() const { return static_cast<double>(v_); }
  constexpr bool is_positive() const { return v_ > 0; }
  friend constexpr bool operator==(Label, Label) = default;

 private:
  constexpr explicit Label(std::int8_t v) : v_(v) {}
  std::int8_t v_;
};

enum class ComplexityLossKind { Hinge };

struct ComplexityLoss {
  ComplexityLossKind kind = ComplexityLossKind::Hinge;
};

struct LagrangianConfig {
  double eta = 0.0;
  ComplexityLoss loss{};
};

/// exp(-label * score). Throws InvalidInput for a non-finite score.
double exp_weight(Label label, double score);

/// (1/N) sum_i exp(-y_i F(x_i)).
double empirical_risk(std::span<const Label> labels, std::span<const double> scores);

/// Label-signed evaluation cost: cost spent on negatives is negative margin.
double complexity_margin(Label label, double omega);

double complexity_loss_value(const ComplexityLoss& loss, double v);

/// -tau'(y * omega). For the hinge loss the left derivative is taken at 0, so
/// every negative gets weight 1 and every positive 0.
double psi_weight(const ComplexityLoss& loss, Label label, double omega);

/// (1/N) sum_i tau(y_i * omega_i).
double complexity_risk(std::span<const Label> labels, std::span<const double> omegas,
                       const ComplexityLoss& loss);

double lagrangian(double risk_e, double risk_c, const LagrangianConfig& cfg);

}  // namespace compact
