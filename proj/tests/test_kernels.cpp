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

// Equivalence tests between the scalar reference kernels and the SIMD
// variants present on this machine. SIMD sums may reassociate and use
// FMA, so comparisons use a tight relative tolerance instead of
// bitwise equality.

#include <doctest.h>

#include <cmath>
#include <vector>

#include "durkit/kernels.hpp"
#include "durkit/rng.hpp"

using namespace durkit;
namespace k = durkit::kernels;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.gaussian() * scale;
  return v;
}

bool close(double a, double b, double rel = 1e-10) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) <= rel * scale;
}

struct BackendGuard {
  ~BackendGuard() { k::set_backend(k::Backend::kAuto); }
};

std::vector<k::Backend> simd_backends() {
  std::vector<k::Backend> backends;
  if (k::backend_supported(k::Backend::kAvx2)) {
    backends.push_back(k::Backend::kAvx2);
  }
  if (k::backend_supported(k::Backend::kNeon)) {
    backends.push_back(k::Backend::kNeon);
  }
  return backends;
}

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(k::backend_supported(k::Backend::kScalar));
  CHECK(k::backend_supported(k::Backend::kAuto));
}

TEST_CASE("scalar kernels compute the expected values") {
  BackendGuard guard;
  k::set_backend(k::Backend::kScalar);

  const double x[] = {1.0, 2.0, 3.0};
  const double m[] = {0.0, 0.0, 1.0};
  const double w[] = {1.0, 0.5, 2.0};
  // 1*1 + 0.5*4 + 2*4 = 11
  CHECK(k::weighted_sq_dist(x, m, w, 3) == doctest::Approx(11.0));

  double y[] = {1.0, 1.0, 1.0};
  k::axpy(2.0, x, y, 3);
  CHECK(y[0] == 3.0);
  CHECK(y[2] == 7.0);

  double sum[] = {0.0, 0.0, 0.0};
  double sum_sq[] = {0.0, 0.0, 0.0};
  k::accumulate_moments(x, sum, sum_sq, 3);
  k::accumulate_moments(x, sum, sum_sq, 3);
  CHECK(sum[1] == 4.0);
  CHECK(sum_sq[2] == 18.0);

  CHECK(k::sum(x, 3) == 6.0);
  CHECK(k::max_value(x, 3) == 3.0);
}

TEST_CASE("SIMD variants match the scalar reference") {
  const auto backends = simd_backends();
  if (backends.empty()) {
    MESSAGE("no SIMD backend on this machine, scalar only");
    return;
  }
  BackendGuard guard;
  Rng rng(101);

  // Sizes around the vector width cover remainder handling.
  const std::size_t sizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17,
                               31, 64, 101, 1024, 4097};
  for (const auto backend : backends) {
    for (const std::size_t n : sizes) {
      const auto x = random_vector(rng, n, 3.0);
      const auto m = random_vector(rng, n, 3.0);
      auto w = random_vector(rng, n);
      for (auto& v : w) v = std::abs(v) + 0.1;

      k::set_backend(k::Backend::kScalar);
      const double ref_wsq = k::weighted_sq_dist(x.data(), m.data(), w.data(), n);
      const double ref_sum = k::sum(x.data(), n);
      const double ref_max = k::max_value(x.data(), n);
      auto ref_y = random_vector(rng, n);
      auto simd_y = ref_y;
      k::axpy(0.37, x.data(), ref_y.data(), n);
      auto ref_s = random_vector(rng, n);
      auto ref_sq = random_vector(rng, n);
      auto simd_s = ref_s;
      auto simd_sq = ref_sq;
      k::accumulate_moments(x.data(), ref_s.data(), ref_sq.data(), n);

      k::set_backend(backend);
      CHECK(close(k::weighted_sq_dist(x.data(), m.data(), w.data(), n), ref_wsq));
      CHECK(close(k::sum(x.data(), n), ref_sum));
      CHECK(k::max_value(x.data(), n) == ref_max);  // max reorders safely
      k::axpy(0.37, x.data(), simd_y.data(), n);
      k::accumulate_moments(x.data(), simd_s.data(), simd_sq.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(close(simd_y[i], ref_y[i]));
        CHECK(close(simd_s[i], ref_s[i]));
        CHECK(close(simd_sq[i], ref_sq[i]));
      }
    }
  }
}

TEST_CASE("backend selection is sticky and reports its name") {
  BackendGuard guard;
  k::set_backend(k::Backend::kScalar);
  CHECK(k::active_backend() == k::Backend::kScalar);
  CHECK(k::active_backend_name() == "scalar");
  for (const auto backend : simd_backends()) {
    k::set_backend(backend);
    CHECK(k::active_backend() == backend);
  }
}
