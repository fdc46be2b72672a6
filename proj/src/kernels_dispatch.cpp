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

#include "durkit/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "durkit/error.hpp"

namespace durkit::kernels {

namespace detail {

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(__i386__)) && \
    (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace detail

namespace {

struct Selection {
  Backend backend;
  const detail::KernelTable* table;
};

Backend pick_auto() {
  if (detail::neon_table() != nullptr) return Backend::kNeon;
  if (detail::avx2_table() != nullptr && detail::cpu_has_avx2())
    return Backend::kAvx2;
  return Backend::kScalar;
}

Backend parse_env_choice(std::string_view value) {
  if (value == "scalar") return Backend::kScalar;
  if (value == "avx2") return Backend::kAvx2;
  if (value == "neon") return Backend::kNeon;
  return Backend::kAuto;
}

Selection resolve(Backend requested) {
  Backend backend = requested;
  if (backend == Backend::kAuto) {
    if (const char* env = std::getenv("DURKIT_KERNELS")) {
      backend = parse_env_choice(env);
    }
  }
  if (backend == Backend::kAuto) backend = pick_auto();
  if (!backend_supported(backend)) {
    fail("kernel backend not supported on this machine: " +
         backend_name(backend));
  }
  const detail::KernelTable* table = nullptr;
  switch (backend) {
    case Backend::kScalar:
      table = &detail::scalar_table();
      break;
    case Backend::kAvx2:
      table = detail::avx2_table();
      break;
    case Backend::kNeon:
      table = detail::neon_table();
      break;
    case Backend::kAuto:
      break;
  }
  return {backend, table};
}

std::atomic<const Selection*>& selection_slot() {
  static std::atomic<const Selection*> slot{nullptr};
  return slot;
}

const Selection& current() {
  const Selection* sel = selection_slot().load(std::memory_order_acquire);
  if (sel == nullptr) {
    static Selection initial = resolve(Backend::kAuto);
    const Selection* expected = nullptr;
    selection_slot().compare_exchange_strong(expected, &initial,
                                             std::memory_order_acq_rel);
    sel = selection_slot().load(std::memory_order_acquire);
  }
  return *sel;
}

}  // namespace

bool backend_supported(Backend backend) {
  switch (backend) {
    case Backend::kAuto:
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
      return detail::avx2_table() != nullptr && detail::cpu_has_avx2();
    case Backend::kNeon:
      return detail::neon_table() != nullptr;
  }
  return false;
}

void set_backend(Backend backend) {
  // Leaked on purpose: kernel pointers must stay valid for the
  // process lifetime and selections are rare (startup, tests).
  auto* sel = new Selection(resolve(backend));
  selection_slot().store(sel, std::memory_order_release);
}

Backend active_backend() { return current().backend; }

std::string backend_name(Backend backend) {
  switch (backend) {
    case Backend::kAuto:
      return "auto";
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

std::string active_backend_name() { return backend_name(active_backend()); }

double weighted_sq_dist(const double* x, const double* m, const double* w,
                        std::size_t n) {
  return current().table->weighted_sq_dist(x, m, w, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  current().table->axpy(a, x, y, n);
}

void accumulate_moments(const double* x, double* sum, double* sum_sq,
                        std::size_t n) {
  current().table->accumulate_moments(x, sum, sum_sq, n);
}

double sum(const double* x, std::size_t n) {
  return current().table->sum(x, n);
}

double max_value(const double* x, std::size_t n) {
  return current().table->max_value(x, n);
}

}  // namespace durkit::kernels
