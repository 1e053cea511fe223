// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
// AVX2 kernels, 4 x f64 per register. Lane k of the accumulator holds exactly
// the partial sum the scalar reference keeps in l<k>.
#include <immintrin.h>

#include "compact/kernels.hpp"

namespace compact::kernels {
namespace {

inline double combine_lanes(__m256d acc) {
  alignas(32) double l[4];
  _mm256_store_pd(l, acc);
  return (l[0] + l[1]) + (l[2] + l[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t body = n - n % 4;
  std::size_t i = 0;
  for (; i < body; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double s = combine_lanes(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t body = n - n % 4;
  std::size_t i = 0;
  for (; i < body; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double s = combine_lanes(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

void agreement_sums_avx2(const double* w, const double* y, const double* g, std::size_t n,
                         double* agree, double* disagree) {
  const __m256d zero = _mm256_setzero_pd();
  __m256d acc_a = zero;
  __m256d acc_d = zero;
  const std::size_t body = n - n % 4;
  std::size_t i = 0;
  for (; i < body; i += 4) {
    const __m256d wv = _mm256_loadu_pd(w + i);
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(g + i));
    const __m256d ok = _mm256_cmp_pd(prod, zero, _CMP_GT_OQ);
    acc_a = _mm256_add_pd(acc_a, _mm256_blendv_pd(zero, wv, ok));
    acc_d = _mm256_add_pd(acc_d, _mm256_blendv_pd(wv, zero, ok));
  }
  double sa = combine_lanes(acc_a);
  double sd = combine_lanes(acc_d);
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

void scale_by_agreement_avx2(double* w, const double* y, const double* g, std::size_t n,
                             double f_agree, double f_disagree) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d fa = _mm256_set1_pd(f_agree);
  const __m256d fd = _mm256_set1_pd(f_disagree);
  const std::size_t body = n - n % 4;
  std::size_t i = 0;
  for (; i < body; i += 4) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(g + i));
    const __m256d factor = _mm256_blendv_pd(fd, fa, _mm256_cmp_pd(prod, zero, _CMP_GT_OQ));
    _mm256_storeu_pd(w + i, _mm256_mul_pd(_mm256_loadu_pd(w + i), factor));
  }
  for (; i < n; ++i) w[i] *= (y[i] * g[i] > 0.0) ? f_agree : f_disagree;
}

void axpy_avx2(double* f, const double* g, double alpha, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  const std::size_t body = n - n % 4;
  std::size_t i = 0;
  for (; i < body; i += 4) {
    const __m256d step = _mm256_mul_pd(a, _mm256_loadu_pd(g + i));
    _mm256_storeu_pd(f + i, _mm256_add_pd(_mm256_loadu_pd(f + i), step));
  }
  for (; i < n; ++i) {
    const double step = alpha * g[i];
    f[i] = f[i] + step;
  }
}

void threshold_select_avx2(const double* x, std::size_t n, double threshold, double lo, double hi,
                           double* out) {
  const __m256d t = _mm256_set1_pd(threshold);
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  const std::size_t body = n - n % 4;
  std::size_t i = 0;
  for (; i < body; i += 4) {
    const __m256d ge = _mm256_cmp_pd(_mm256_loadu_pd(x + i), t, _CMP_GE_OQ);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(vlo, vhi, ge));
  }
  for (; i < n; ++i) out[i] = x[i] >= threshold ? hi : lo;
}

}  // namespace

const KernelTable& avx2_kernels_unchecked() {
  static const KernelTable table{
      "avx2",    dot_avx2, sum_avx2, agreement_sums_avx2, scale_by_agreement_avx2,
      axpy_avx2, threshold_select_avx2,
  };
  return table;
}

}  // namespace compact::kernels
