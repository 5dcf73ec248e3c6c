// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>

namespace onelap {

/// Number of worker threads honoured by the loops below. Reads
/// ONELAP_THREADS once; 0 or unset means "runtime default".
int thread_limit();
void set_thread_limit(int n);

namespace detail {

// Reductions split [0, n) into a fixed number of blocks independent of the
// thread count, sum each block serially and combine the partials in block
// order. Results are bitwise reproducible for any thread count.
inline constexpr std::size_t kReduceBlocks = 64;

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
#if defined(ONELAP_HAVE_OPENMP)
  const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(thread_limit())
  for (long long i = 0; i < nn; ++i) fn(static_cast<std::size_t>(i));
#else
  for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

template <class Fn>
double parallel_sum(std::size_t n, Fn&& term) {
  std::array<double, kReduceBlocks> partial{};
  const std::size_t chunk = (n + kReduceBlocks - 1) / kReduceBlocks;
  parallel_for(kReduceBlocks, [&](std::size_t b) {
    const std::size_t lo = b * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[b] = s;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

template <class Fn>
double parallel_max(std::size_t n, Fn&& term) {
  std::array<double, kReduceBlocks> partial;
  partial.fill(0.0);
  const std::size_t chunk = (n + kReduceBlocks - 1) / kReduceBlocks;
  parallel_for(kReduceBlocks, [&](std::size_t b) {
    const std::size_t lo = b * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    double m = 0.0;
    for (std::size_t i = lo; i < hi; ++i) m = std::max(m, term(i));
    partial[b] = m;
  });
  return *std::max_element(partial.begin(), partial.end());
}

}  // namespace detail
}  // namespace onelap
