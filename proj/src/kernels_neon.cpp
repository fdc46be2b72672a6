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

// NEON kernel variants (aarch64, 2 doubles per vector). NEON is part
// of the aarch64 baseline, so no runtime CPU check is needed beyond
// the architecture itself.

#include "durkit/kernels.hpp"

#if defined(DURKIT_COMPILE_NEON)

#include <arm_neon.h>

namespace durkit::kernels::detail {

namespace {

double neon_weighted_sq_dist(const double* x, const double* m,
                             const double* w, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t d = 0;
  for (; d + 2 <= n; d += 2) {
    const float64x2_t diff = vsubq_f64(vld1q_f64(x + d), vld1q_f64(m + d));
    acc = vfmaq_f64(acc, vmulq_f64(vld1q_f64(w + d), diff), diff);
  }
  double tail = 0.0;
  for (; d < n; ++d) {
    const double diff = x[d] - m[d];
    tail += w[d] * diff * diff;
  }
  return vaddvq_f64(acc) + tail;
}

void neon_axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t d = 0;
  for (; d + 2 <= n; d += 2) {
    vst1q_f64(y + d, vfmaq_f64(vld1q_f64(y + d), av, vld1q_f64(x + d)));
  }
  for (; d < n; ++d) y[d] += a * x[d];
}

void neon_accumulate_moments(const double* x, double* sum, double* sum_sq,
                             std::size_t n) {
  std::size_t d = 0;
  for (; d + 2 <= n; d += 2) {
    const float64x2_t xv = vld1q_f64(x + d);
    vst1q_f64(sum + d, vaddq_f64(vld1q_f64(sum + d), xv));
    vst1q_f64(sum_sq + d, vfmaq_f64(vld1q_f64(sum_sq + d), xv, xv));
  }
  for (; d < n; ++d) {
    sum[d] += x[d];
    sum_sq[d] += x[d] * x[d];
  }
}

double neon_sum(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t d = 0;
  for (; d + 2 <= n; d += 2) {
    acc = vaddq_f64(acc, vld1q_f64(x + d));
  }
  double tail = 0.0;
  for (; d < n; ++d) tail += x[d];
  return vaddvq_f64(acc) + tail;
}

double neon_max_value(const double* x, std::size_t n) {
  std::size_t d = 0;
  double best;
  if (n >= 2) {
    float64x2_t acc = vld1q_f64(x);
    for (d = 2; d + 2 <= n; d += 2) {
      acc = vmaxq_f64(acc, vld1q_f64(x + d));
    }
    best = vmaxvq_f64(acc);
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

const KernelTable* neon_table() {
  static const KernelTable table = {
      neon_weighted_sq_dist, neon_axpy, neon_accumulate_moments, neon_sum,
      neon_max_value,
  };
  return &table;
}

}  // namespace durkit::kernels::detail

#else  // !DURKIT_COMPILE_NEON

namespace durkit::kernels::detail {

const KernelTable* neon_table() { return nullptr; }

}  // namespace durkit::kernels::detail

#endif
