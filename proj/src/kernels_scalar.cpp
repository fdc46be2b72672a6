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

// Scalar reference kernels. These define the semantics the SIMD
// variants are tested against.

#include "durkit/kernels.hpp"

namespace durkit::kernels::detail {

namespace {

double scalar_weighted_sq_dist(const double* x, const double* m,
                               const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t d = 0; d < n; ++d) {
    const double diff = x[d] - m[d];
    acc += w[d] * diff * diff;
  }
  return acc;
}

void scalar_axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t d = 0; d < n; ++d) y[d] += a * x[d];
}

void scalar_accumulate_moments(const double* x, double* sum, double* sum_sq,
                               std::size_t n) {
  for (std::size_t d = 0; d < n; ++d) {
    sum[d] += x[d];
    sum_sq[d] += x[d] * x[d];
  }
}

double scalar_sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t d = 0; d < n; ++d) acc += x[d];
  return acc;
}

double scalar_max_value(const double* x, std::size_t n) {
  double best = x[0];
  for (std::size_t d = 1; d < n; ++d) {
    if (x[d] > best) best = x[d];
  }
  return best;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table = {
      scalar_weighted_sq_dist, scalar_axpy, scalar_accumulate_moments,
      scalar_sum, scalar_max_value,
  };
  return table;
}

}  // namespace durkit::kernels::detail
