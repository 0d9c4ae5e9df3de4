#include "lse/parallel.hpp"

#include <atomic>
#include <cstdlib>

namespace lse::par {

namespace {

int env_default() {
  if (const char* s = std::getenv("LSE_WORKERS")) {
    const int v = std::atoi(s);
    if (v > 0) return v;
  }
  return 0;
}

std::atomic<int> g_max_threads{env_default()};

}  // namespace

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }

int max_threads() { return g_max_threads.load(); }

int resolved_threads() {
  const int cap = g_max_threads.load();
#ifdef _OPENMP
  const int hw = omp_get_max_threads();
  return cap == 0 ? hw : (cap < hw ? cap : hw);
#else
  return cap == 0 ? 1 : 1;
#endif
}

}  // namespace lse::par
