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

#include "durkit/upsample.hpp"

#include <cmath>

#include "durkit/error.hpp"
#include "durkit/kernels.hpp"

namespace durkit {

UpsampleWeights gaussian_upsample_weights(std::span<const int> durations,
                                          double sigma_g) {
  if (!(sigma_g > 0.0)) fail("sigma_g must be > 0");
  if (durations.empty()) fail("no durations given");

  std::int64_t total = 0;
  for (int d : durations) {
    if (d < 0) fail("negative duration");
    total += d;
  }
  if (total == 0) fail("all durations are zero, nothing to upsample");

  const std::size_t n_phonemes = durations.size();
  const std::size_t n_frames = static_cast<std::size_t>(total);

  std::vector<double> centers(n_phonemes);
  double cumulative = 0.0;
  for (std::size_t n = 0; n < n_phonemes; ++n) {
    cumulative += durations[n];
    centers[n] = cumulative - 0.5 * durations[n];
  }

  // Rows are softmax over -(t + 0.5 - c_n)^2 / (2 sigma^2); the shared
  // max exponent is subtracted before exp so distant centers underflow
  // to 0 instead of producing 0/0 rows.
  Matrix weights(n_frames, n_phonemes);
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma_g * sigma_g);
  std::vector<double> exponents(n_phonemes);
  for (std::size_t t = 0; t < n_frames; ++t) {
    const double position = static_cast<double>(t) + 0.5;
    for (std::size_t n = 0; n < n_phonemes; ++n) {
      const double offset = position - centers[n];
      exponents[n] = -offset * offset * inv_two_sigma_sq;
    }
    const double shift = kernels::max_value(exponents.data(), n_phonemes);
    double* row = weights.row(t);
    for (std::size_t n = 0; n < n_phonemes; ++n) {
      row[n] = std::exp(exponents[n] - shift);
    }
    const double norm = kernels::sum(row, n_phonemes);
    for (std::size_t n = 0; n < n_phonemes; ++n) row[n] /= norm;
  }

  return UpsampleWeights{std::move(weights), std::move(centers)};
}

FeatureMatrix upsample_states(const FeatureMatrix& states,
                              const UpsampleWeights& weights) {
  const std::size_t n_phonemes = weights.weights.cols();
  const std::size_t n_frames = weights.weights.rows();
  if (states.rows() != n_phonemes) {
    fail("state count " + std::to_string(states.rows()) +
         " does not match weight columns " + std::to_string(n_phonemes));
  }
  const std::size_t dims = states.cols();
  FeatureMatrix output(n_frames, dims, 0.0);
  for (std::size_t t = 0; t < n_frames; ++t) {
    const double* w = weights.weights.row(t);
    double* out_row = output.row(t);
    for (std::size_t n = 0; n < n_phonemes; ++n) {
      if (w[n] == 0.0) continue;
      kernels::axpy(w[n], states.row(n), out_row, dims);
    }
  }
  return output;
}

}  // namespace durkit
