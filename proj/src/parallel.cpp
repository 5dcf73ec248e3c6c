// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

#include "onelap/parallel.hpp"

#include <atomic>
#include <cstdlib>

#if defined(ONELAP_HAVE_OPENMP)
#include <omp.h>
#endif

namespace onelap {

namespace {

int env_threads() {
  const char* s = std::getenv("ONELAP_THREADS");
  if (s == nullptr) return 0;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (end == s || v < 0) return 0;
  return static_cast<int>(v);
}

std::atomic<int>& limit() {
  static std::atomic<int> n{env_threads()};
  return n;
}

}  // namespace

int thread_limit() {
  const int n = limit().load(std::memory_order_relaxed);
  if (n > 0) return n;
#if defined(ONELAP_HAVE_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_thread_limit(int n) { limit().store(n < 0 ? 0 : n, std::memory_order_relaxed); }

}  // namespace onelap
