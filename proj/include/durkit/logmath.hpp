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

#include <algorithm>
#include <cmath>
#include <span>

// Log-domain arithmetic. Impossible paths carry kLogZero rather than
// -inf so that sums and comparisons stay NaN-free.

namespace durkit {

inline constexpr double kLogZero = -1.0e30;

inline bool is_log_zero(double v) { return v <= kLogZero * 0.5; }

inline double log_add(double a, double b) {
  if (is_log_zero(a)) return b;
  if (is_log_zero(b)) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

inline double log_sum_exp(std::span<const double> values) {
  double shift = kLogZero;
  for (double v : values) shift = std::max(shift, v);
  if (is_log_zero(shift)) return kLogZero;
  double total = 0.0;
  for (double v : values) {
    if (!is_log_zero(v)) total += std::exp(v - shift);
  }
  return shift + std::log(total);
}

}  // namespace durkit
