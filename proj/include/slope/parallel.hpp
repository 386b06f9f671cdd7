#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace slope {

/// Execution policy for the data-parallel field kernels. Every kernel has a
/// serial driver (the reference used by the parity tests) and an OpenMP one;
/// both run the same per-node body, and reductions use a fixed chunk order,
/// so results are bit-identical regardless of policy or thread count.
enum class Exec { Serial, Parallel };

/// Data-parallel width: min(omp_get_max_threads(), $SLOPE_THREADS).
int max_threads();

namespace detail {
constexpr std::size_t kParallelGrain = 1024;
}

template <class Fn>
void for_each_index(std::size_t count, Fn&& fn, Exec exec = Exec::Parallel) {
#ifdef _OPENMP
  if (exec == Exec::Parallel && max_threads() > 1 && count >= detail::kParallelGrain) {
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (long long i = 0; i < static_cast<long long>(count); ++i)
      fn(static_cast<std::size_t>(i));
    return;
  }
#else
  (void)exec;
#endif
  for (std::size_t i = 0; i < count; ++i) fn(i);
}

/// Deterministic sum: Kahan within fixed 4096-element chunks (parallel over
/// chunks), chunk partials accumulated left to right.
double reduce_sum(const double* v, std::size_t count, Exec exec = Exec::Parallel);

/// Max reduction (exact regardless of order). Returns -inf for empty input.
double reduce_max(const double* v, std::size_t count, Exec exec = Exec::Parallel);
double reduce_min(const double* v, std::size_t count, Exec exec = Exec::Parallel);

}  // namespace slope
