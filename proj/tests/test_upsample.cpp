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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "durkit/error.hpp"
#include "durkit/rng.hpp"
#include "durkit/upsample.hpp"
#include "oracles.hpp"

using namespace durkit;

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = rng.gaussian() * 2.0;
  return m;
}

}  // namespace

TEST_CASE("single phoneme with one frame gets full weight") {
  const std::vector<int> durations = {1};
  for (double sigma_g : {0.1, 1.0, 25.0}) {
    const auto w = gaussian_upsample_weights(durations, sigma_g);
    REQUIRE(w.weights.rows() == 1);
    REQUIRE(w.weights.cols() == 1);
    CHECK(w.weights.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("narrow width concentrates each frame on its own segment") {
  const std::vector<int> durations = {2, 2};
  const auto w = gaussian_upsample_weights(durations, 0.05);
  CHECK(w.weights.at(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(w.weights.at(3, 1) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("weights match the direct formula") {
  const std::vector<int> durations = {3, 5};
  const auto w = gaussian_upsample_weights(durations, 1.0);
  const auto reference = testing::reference_upsample_weights(durations, 1.0);
  REQUIRE(w.weights.rows() == reference.rows());
  for (std::size_t t = 0; t < reference.rows(); ++t) {
    double row_sum = 0.0;
    for (std::size_t n = 0; n < reference.cols(); ++n) {
      CHECK(std::abs(w.weights.at(t, n) - reference.at(t, n)) < 1e-12);
      row_sum += w.weights.at(t, n);
    }
    CHECK(std::abs(row_sum - 1.0) < 1e-6);
  }
  // with sigma_g = 1 the dominant phoneme is the one whose segment
  // contains the frame (the boundary frame may tie exactly)
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(w.weights.at(t, 0) > w.weights.at(t, 1));
  }
  CHECK(w.weights.at(3, 1) >= w.weights.at(3, 0));
  for (std::size_t t = 4; t < 8; ++t) {
    CHECK(w.weights.at(t, 1) > w.weights.at(t, 0));
  }
}

TEST_CASE("random cases: row-stochastic, frame count, hull") {
  Rng rng(404);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(8);
    std::vector<int> durations(n);
    std::int64_t total = 0;
    for (auto& d : durations) {
      d = static_cast<int>(rng.below(7));
      total += d;
    }
    if (total == 0) durations[0] = 1, total = 1;
    const double sigma_g = 0.2 + 5.0 * rng.uniform();
    const auto w = gaussian_upsample_weights(durations, sigma_g);
    REQUIRE(w.weights.rows() == static_cast<std::size_t>(total));
    for (std::size_t t = 0; t < w.weights.rows(); ++t) {
      double row_sum = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        CHECK(w.weights.at(t, c) >= 0.0);
        row_sum += w.weights.at(t, c);
      }
      CHECK(std::abs(row_sum - 1.0) < 1e-6);
    }

    const std::size_t dims = 3;
    const auto states = random_matrix(rng, n, dims);
    const auto frames = upsample_states(states, w);
    REQUIRE(frames.rows() == w.weights.rows());
    for (std::size_t d = 0; d < dims; ++d) {
      double lo = 1e300;
      double hi = -1e300;
      for (std::size_t r = 0; r < n; ++r) {
        lo = std::min(lo, states.at(r, d));
        hi = std::max(hi, states.at(r, d));
      }
      for (std::size_t t = 0; t < frames.rows(); ++t) {
        CHECK(frames.at(t, d) >= lo - 1e-9);
        CHECK(frames.at(t, d) <= hi + 1e-9);
      }
    }
  }
}

TEST_CASE("identical state rows blend to the same row") {
  Rng rng(11);
  const std::vector<int> durations = {2, 3, 1};
  const auto w = gaussian_upsample_weights(durations, 1.5);
  Matrix states(3, 4);
  const auto row = random_matrix(rng, 1, 4);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 4; ++c) states.at(r, c) = row.at(0, c);
  }
  const auto frames = upsample_states(states, w);
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(frames.at(t, c) == doctest::Approx(row.at(0, c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("one-hot weight rows gather state rows") {
  Rng rng(71);
  const auto states = random_matrix(rng, 3, 4);
  UpsampleWeights weights;
  weights.weights = Matrix(5, 3, 0.0);
  const int picks[5] = {2, 0, 1, 1, 2};
  for (std::size_t t = 0; t < 5; ++t) {
    weights.weights.at(t, picks[t]) = 1.0;
  }
  const auto frames = upsample_states(states, weights);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t d = 0; d < 4; ++d) {
      CHECK(frames.at(t, d) == states.at(picks[t], d));
    }
  }
}

TEST_CASE("upsampling is linear in the states") {
  Rng rng(12);
  const std::vector<int> durations = {4, 2, 6, 1};
  const auto w = gaussian_upsample_weights(durations, 2.0);
  const auto h1 = random_matrix(rng, 4, 5);
  const auto h2 = random_matrix(rng, 4, 5);
  const double a = 1.7;
  const double b = -0.3;

  Matrix combined(4, 5);
  for (std::size_t i = 0; i < combined.data().size(); ++i) {
    combined.data()[i] = a * h1.data()[i] + b * h2.data()[i];
  }
  const auto lhs = upsample_states(combined, w);
  const auto u1 = upsample_states(h1, w);
  const auto u2 = upsample_states(h2, w);
  for (std::size_t i = 0; i < lhs.data().size(); ++i) {
    CHECK(std::abs(lhs.data()[i] - (a * u1.data()[i] + b * u2.data()[i])) <
          1e-9);
  }
}

TEST_CASE("zero-duration phonemes occupy no frames") {
  const std::vector<int> durations = {0, 4};
  const auto w = gaussian_upsample_weights(durations, 1.0);
  CHECK(w.weights.rows() == 4);
  // the zero-duration phoneme may still receive mass
  CHECK(w.weights.at(0, 0) > 0.0);
}

TEST_CASE("error cases") {
  CHECK_THROWS_AS(gaussian_upsample_weights(std::vector<int>{0, 0}, 1.0),
                  DataError);
  CHECK_THROWS_AS(gaussian_upsample_weights(std::vector<int>{1}, 0.0),
                  DataError);
  CHECK_THROWS_AS(gaussian_upsample_weights(std::vector<int>{}, 1.0),
                  DataError);

  const auto w = gaussian_upsample_weights(std::vector<int>{2, 2}, 1.0);
  Matrix wrong_shape(3, 4);
  CHECK_THROWS_AS(upsample_states(wrong_shape, w), DataError);
}
