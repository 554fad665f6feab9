#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace macauth {

/// Serial is the reference path; parallel must produce bit-identical results.
enum class Execution { serial, parallel };

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline int thread_id() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

/// Runs body(i) for i in [0, count); iterations must be independent.
template <typename Body>
void for_each_index(std::size_t count, Execution exec, Body&& body) {
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
}

}  // namespace macauth
