#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef NDM_HAVE_OPENMP
#include <omp.h>
#endif

namespace ndm {

/// Serial is the reference path; Parallel distributes independent work items
/// over OpenMP threads. Every parallel loop in the library writes only to
/// per-item outputs, so both policies produce bit-identical results.
enum class ExecPolicy { Serial, Parallel };

inline int max_threads() {
#ifdef NDM_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Calls fn(i) for i in [0, n). The first exception thrown by any item is
/// rethrown on the calling thread after the loop.
template <typename Fn>
void parallel_for(std::size_t n, ExecPolicy policy, Fn&& fn) {
  if (policy == ExecPolicy::Serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  const auto count = static_cast<long long>(n);
#ifdef NDM_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace ndm
