#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lse::par {

// Global cap on worker threads. 0 means "use the OpenMP default".
// The LSE_WORKERS environment variable, when set, seeds this value.
void set_max_threads(int n);
int max_threads();
int resolved_threads();

// Plain-loop reference twin of parallel_for. Kernels must produce the
// same bits through either path: every iteration writes only to its own
// output slot and reductions happen outside, in index order.
template <class F>
void serial_for(std::size_t n, F&& fn) {
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

template <class F>
void parallel_for(std::size_t n, F&& fn) {
#ifdef _OPENMP
  const int threads = resolved_threads();
  if (threads != 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      fn(static_cast<std::size_t>(i));
    return;
  }
#endif
  serial_for(n, fn);
}

}  // namespace lse::par
