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

#include <span>
#include <vector>

#include "durkit/types.hpp"

// Gaussian upsampling: N phoneme-level vectors plus integer durations
// become T = sum(durations) frame-level vectors. Frame t (sampled at
// t + 0.5) takes a convex combination of the phoneme vectors with
// weights exp(-(t + 0.5 - c_n)^2 / (2 sigma_g^2)) normalized over n,
// where c_n is the midpoint of phoneme n's duration segment.

namespace durkit {

struct UpsampleWeights {
  Matrix weights;               // T x N, rows sum to 1
  std::vector<double> centers;  // c_n, frame positions
};

// sigma_g is the Gaussian width in frames (> 0). Throws when all
// durations are zero. Zero-duration phonemes occupy no frames but may
// still receive weight mass from nearby frames.
UpsampleWeights gaussian_upsample_weights(std::span<const int> durations,
                                          double sigma_g);

// output row t = sum_n W[t][n] * states[n]; states is N x D.
FeatureMatrix upsample_states(const FeatureMatrix& states,
                              const UpsampleWeights& weights);

}  // namespace durkit
