// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel inner loops of training and batch scoring.
//
// Every kernel has a scalar reference and (on x86-64) an AVX2 variant, chosen
// once at runtime. Reductions use one canonical order in both variants: four
// interleaved lane accumulators (element i goes to lane i % 4 over the largest
// multiple-of-four prefix), combined as (l0 + l1) + (l2 + l3), then the tail
// added left to right. Both variants therefore return bit-identical results,
// which keeps trained models reproducible across machines.
//
// Set COMPACT_SIMD=scalar in the environment to force the reference path.
#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace compact::kernels {

struct KernelTable {
  const char* name;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// sum_i a[i]
  double (*sum)(const double* a, std::size_t n);
  /// Splits sum_i w[i] into the part where y[i] * g[i] > 0 and the rest.
  void (*agreement_sums)(const double* w, const double* y, const double* g, std::size_t n,
                         double* agree, double* disagree);
  /// w[i] *= (y[i] * g[i] > 0 ? f_agree : f_disagree)
  void (*scale_by_agreement)(double* w, const double* y, const double* g, std::size_t n,
                             double f_agree, double f_disagree);
  /// f[i] += alpha * g[i]   (multiply then add, never fused)
  void (*axpy)(double* f, const double* g, double alpha, std::size_t n);
  /// out[i] = x[i] >= threshold ? hi : lo
  void (*threshold_select)(const double* x, std::size_t n, double threshold, double lo, double hi,
                           double* out);
};

const KernelTable& scalar_table();
/// nullptr when the variant was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_table();
/// The table used by the span wrappers below.
const KernelTable& active_table();
/// Force a specific variant ("scalar" or "avx2"); returns false if unavailable.
bool select(std::string_view name);

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
void agreement_sums(std::span<const double> w, std::span<const double> y,
                    std::span<const double> g, double& agree, double& disagree);
void scale_by_agreement(std::span<double> w, std::span<const double> y,
                        std::span<const double> g, double f_agree, double f_disagree);
void axpy(std::span<double> f, std::span<const double> g, double alpha);
void threshold_select(std::span<const double> x, double threshold, double lo, double hi,
                      std::span<double> out);

}  // namespace compact::kernels
