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

// Scalar vs SIMD kernel throughput. Run with
//   DURKIT_KERNELS=scalar ./bench_kernels
// to pin the reference path; the default picks the best backend.

#include <benchmark/benchmark.h>

#include <vector>

#include "durkit/kernels.hpp"
#include "durkit/rng.hpp"

namespace {

namespace k = durkit::kernels;

std::vector<double> filled(std::size_t n, durkit::Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.gaussian();
  return v;
}

void bench_weighted_sq_dist(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  durkit::Rng rng(1);
  const auto x = filled(n, rng);
  const auto m = filled(n, rng);
  auto w = filled(n, rng);
  for (auto& v : w) v = v * v + 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        k::weighted_sq_dist(x.data(), m.data(), w.data(), n));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void bench_axpy(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  durkit::Rng rng(2);
  const auto x = filled(n, rng);
  auto y = filled(n, rng);
  for (auto _ : state) {
    k::axpy(1.0009765625, x.data(), y.data(), n);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void bench_accumulate_moments(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  durkit::Rng rng(3);
  const auto x = filled(n, rng);
  auto sum = filled(n, rng);
  auto sum_sq = filled(n, rng);
  for (auto _ : state) {
    k::accumulate_moments(x.data(), sum.data(), sum_sq.data(), n);
    benchmark::DoNotOptimize(sum.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void bench_sum(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  durkit::Rng rng(4);
  const auto x = filled(n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(k::sum(x.data(), n));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void bench_max_value(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  durkit::Rng rng(5);
  const auto x = filled(n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(k::max_value(x.data(), n));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

// 16 and 80 match the common feature widths; the large sizes show the
// streaming behavior.
BENCHMARK(bench_weighted_sq_dist)->Arg(16)->Arg(80)->Arg(1024)->Arg(65536);
BENCHMARK(bench_axpy)->Arg(16)->Arg(80)->Arg(1024)->Arg(65536);
BENCHMARK(bench_accumulate_moments)->Arg(16)->Arg(80)->Arg(1024)->Arg(65536);
BENCHMARK(bench_sum)->Arg(16)->Arg(80)->Arg(1024)->Arg(65536);
BENCHMARK(bench_max_value)->Arg(16)->Arg(80)->Arg(1024)->Arg(65536);

}  // namespace

BENCHMARK_MAIN();
