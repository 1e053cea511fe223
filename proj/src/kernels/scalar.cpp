// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
// Reference kernels. The AVX2 variant must reproduce these bit for bit.
#include "compact/kernels.hpp"

namespace compact::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  const std::size_t body = n - n % 4;
  std::size_t i = 0;
  for (; i < body; i += 4) {
    l0 += a[i] * b[i];
    l1 += a[i + 1] * b[i + 1];
    l2 += a[i + 2] * b[i + 2];
    l3 += a[i + 3] * b[i + 3];
  }
  double s = (l0 + l1) + (l2 + l3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_scalar(const double* a, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  const std::size_t body = n - n % 4;
  std::size_t i = 0;
  for (; i < body; i += 4) {
    l0 += a[i];
    l1 += a[i + 1];
    l2 += a[i + 2];
    l3 += a[i + 3];
  }
  double s = (l0 + l1) + (l2 + l3);
  for (; i < n; ++i) s += a[i];
  return s;
}

void agreement_sums_scalar(const double* w, const double* y, const double* g, std::size_t n,
                           double* agree, double* disagree) {
  double a[4] = {0, 0, 0, 0};
  double d[4] = {0, 0, 0, 0};
  const std::size_t body = n - n % 4;
  std::size_t i = 0;
  for (; i < body; i += 4) {
    for (std::size_t k = 0; k < 4; ++k) {
      const bool ok = y[i + k] * g[i + k] > 0.0;
      a[k] += ok ? w[i + k] : 0.0;
      d[k] += ok ? 0.0 : w[i + k];
    }
  }
  double sa = (a[0] + a[1]) + (a[2] + a[3]);
  double sd = (d[0] + d[1]) + (d[2] + d[3]);
  for (; i < n; ++i) {
    if (y[i] * g[i] > 0.0) {
      sa += w[i];
    } else {
      sd += w[i];
    }
  }
  *agree = sa;
  *disagree = sd;
}

void scale_by_agreement_scalar(double* w, const double* y, const double* g, std::size_t n,
                               double f_agree, double f_disagree) {
  for (std::size_t i = 0; i < n; ++i) w[i] *= (y[i] * g[i] > 0.0) ? f_agree : f_disagree;
}

void axpy_scalar(double* f, const double* g, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double step = alpha * g[i];
    f[i] = f[i] + step;
  }
}

void threshold_select_scalar(const double* x, std::size_t n, double threshold, double lo, double hi,
                             double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] >= threshold ? hi : lo;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar",           dot_scalar, sum_scalar, agreement_sums_scalar, scale_by_agreement_scalar,
      axpy_scalar,        threshold_select_scalar,
  };
  return table;
}

}  // namespace compact::kernels
