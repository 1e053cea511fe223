// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "compact/errors.hpp"
#include "compact/kernels.hpp"

namespace compact::kernels {

#if defined(COMPACT_WITH_AVX2)
const KernelTable& avx2_kernels_unchecked();
#endif

const KernelTable* avx2_table() {
#if defined(COMPACT_WITH_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_kernels_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* initial_table() {
  const char* env = std::getenv("COMPACT_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return &scalar_table();
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw InvalidInput(std::string(what) + ": length mismatch");
}

}  // namespace

const KernelTable& active_table() { return *current().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
  if (name == "scalar") {
    current().store(&scalar_table());
    return true;
  }
  if (name == "avx2") {
    if (const KernelTable* t = avx2_table()) {
      current().store(t);
      return true;
    }
  }
  return false;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same(a.size(), b.size(), "dot");
  return active_table().dot(a.data(), b.data(), a.size());
}

double sum(std::span<const double> a) { return active_table().sum(a.data(), a.size()); }

void agreement_sums(std::span<const double> w, std::span<const double> y,
                    std::span<const double> g, double& agree, double& disagree) {
  require_same(w.size(), y.size(), "agreement_sums");
  require_same(w.size(), g.size(), "agreement_sums");
  active_table().agreement_sums(w.data(), y.data(), g.data(), w.size(), &agree, &disagree);
}

void scale_by_agreement(std::span<double> w, std::span<const double> y,
                        std::span<const double> g, double f_agree, double f_disagree) {
  require_same(w.size(), y.size(), "scale_by_agreement");
  require_same(w.size(), g.size(), "scale_by_agreement");
  active_table().scale_by_agreement(w.data(), y.data(), g.data(), w.size(), f_agree, f_disagree);
}

void axpy(std::span<double> f, std::span<const double> g, double alpha) {
  require_same(f.size(), g.size(), "axpy");
  active_table().axpy(f.data(), g.data(), alpha, f.size());
}

void threshold_select(std::span<const double> x, double threshold, double lo, double hi,
                      std::span<double> out) {
  require_same(x.size(), out.size(), "threshold_select");
  active_table().threshold_select(x.data(), x.size(), threshold, lo, hi, out.data());
}

}  // namespace compact::kernels
