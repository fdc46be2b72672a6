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

#pragma once

#include <cstddef>
#include <string>

// Arithmetic inner loops shared by the Gaussian-mixture scorer, the
// EM statistics accumulator and the upsampling blend. Each kernel has
// a scalar reference implementation plus AVX2 (x86-64) and NEON
// (aarch64) variants selected once at startup. The SIMD variants may
// reassociate sums and contract to FMA, so results can differ from the
// scalar reference by rounding only; the equivalence tests pin that
// down. Selection can be forced via set_backend() or the
// DURKIT_KERNELS environment variable (auto|scalar|avx2|neon).

namespace durkit::kernels {

enum class Backend { kAuto, kScalar, kAvx2, kNeon };

// True when the variant was compiled in and the CPU supports it.
bool backend_supported(Backend backend);

// Selects a backend for all subsequent kernel calls. kAuto picks the
// best supported variant. Throws DataError for an unsupported choice.
void set_backend(Backend backend);

Backend active_backend();
std::string backend_name(Backend backend);
std::string active_backend_name();

// sum_d w[d] * (x[d] - m[d])^2  -- the Gaussian log-density hot loop.
double weighted_sq_dist(const double* x, const double* m, const double* w,
                        std::size_t n);

// y[d] += a * x[d]
void axpy(double a, const double* x, double* y, std::size_t n);

// sum[d] += x[d];  sum_sq[d] += x[d]^2  -- EM sufficient statistics.
void accumulate_moments(const double* x, double* sum, double* sum_sq,
                        std::size_t n);

double sum(const double* x, std::size_t n);

double max_value(const double* x, std::size_t n);

// Function-pointer table; detail, exposed so the dispatch unit and the
// per-backend translation units can share it.
namespace detail {

struct KernelTable {
  double (*weighted_sq_dist)(const double*, const double*, const double*,
                             std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*accumulate_moments)(const double*, double*, double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*max_value)(const double*, std::size_t);
};

const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();  // nullptr when not compiled in
bool cpu_has_avx2();

}  // namespace detail

}  // namespace durkit::kernels
