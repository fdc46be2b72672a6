// Copyright 2026 durkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// AVX2 + FMA kernel variants, 4 doubles per vector. This translation
// unit is the only one built with -mavx2 -mfma; callers reach it
// through the dispatch table after a runtime CPU check.

#include "durkit/kernels.hpp"

#if defined(DURKIT_COMPILE_AVX2)

#include <immintrin.h>

namespace durkit::kernels::detail {

namespace {

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double avx2_weighted_sq_dist(const double* x, const double* m,
                             const double* w, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t d = 0;
  for (; d + 4 <= n; d += 4) {
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(x + d),
                                       _mm256_loadu_pd(m + d));
    const __m256d wsq = _mm256_mul_pd(_mm256_loadu_pd(w + d), diff);
    acc = _mm256_fmadd_pd(wsq, diff, acc);
  }
  double tail = 0.0;
  for (; d < n; ++d) {
    const double diff = x[d] - m[d];
    tail += w[d] * diff * diff;
  }
  return hsum(acc) + tail;
}

void avx2_axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t d = 0;
  for (; d + 4 <= n; d += 4) {
    const __m256d r =
        _mm256_fmadd_pd(av, _mm256_loadu_pd(x + d), _mm256_loadu_pd(y + d));
    _mm256_storeu_pd(y + d, r);
  }
  for (; d < n; ++d) y[d] += a * x[d];
}

void avx2_accumulate_moments(const double* x, double* sum, double* sum_sq,
                             std::size_t n) {
  std::size_t d = 0;
  for (; d + 4 <= n; d += 4) {
    const __m256d xv = _mm256_loadu_pd(x + d);
    _mm256_storeu_pd(sum + d, _mm256_add_pd(_mm256_loadu_pd(sum + d), xv));
    _mm256_storeu_pd(sum_sq + d,
                     _mm256_fmadd_pd(xv, xv, _mm256_loadu_pd(sum_sq + d)));
  }
  for (; d < n; ++d) {
    sum[d] += x[d];
    sum_sq[d] += x[d] * x[d];
  }
}

double avx2_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t d = 0;
  for (; d + 4 <= n; d += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + d));
  }
  double tail = 0.0;
  for (; d < n; ++d) tail += x[d];
  return hsum(acc) + tail;
}

double avx2_max_value(const double* x, std::size_t n) {
  std::size_t d = 0;
  double best;
  if (n >= 4) {
    __m256d acc = _mm256_loadu_pd(x);
    for (d = 4; d + 4 <= n; d += 4) {
      acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + d));
    }
    const __m128d lo = _mm256_castpd256_pd128(acc);
    const __m128d hi = _mm256_extractf128_pd(acc, 1);
    const __m128d pair = _mm_max_pd(lo, hi);
    best = _mm_cvtsd_f64(_mm_max_sd(pair, _mm_unpackhi_pd(pair, pair)));
  } else {
    best = x[0];
    d = 1;
  }
  for (; d < n; ++d) {
    if (x[d] > best) best = x[d];
  }
  return best;
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table = {
      avx2_weighted_sq_dist, avx2_axpy, avx2_accumulate_moments, avx2_sum,
      avx2_max_value,
  };
  return &table;
}

}  // namespace durkit::kernels::detail

#else  // !DURKIT_COMPILE_AVX2

namespace durkit::kernels::detail {

const KernelTable* avx2_table() { return nullptr; }

}  // namespace durkit::kernels::detail

#endif
