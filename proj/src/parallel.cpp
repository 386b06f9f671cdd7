#include "slope/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <vector>

namespace slope {

int max_threads() {
  static const int cached = [] {
    int n = 1;
#ifdef _OPENMP
    n = omp_get_max_threads();
#endif
    if (const char* env = std::getenv("SLOPE_THREADS")) {
      const int cap = std::atoi(env);
      if (cap >= 1) n = std::min(n, cap);
    }
    return n;
  }();
  return cached;
}

namespace {
constexpr std::size_t kChunk = 4096;

double kahan_chunk(const double* v, std::size_t lo, std::size_t hi) {
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double y = v[i] - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}
}  // namespace

double reduce_sum(const double* v, std::size_t count, Exec exec) {
  if (count == 0) return 0.0;
  const std::size_t nchunks = (count + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks);
  for_each_index(
      nchunks,
      [&](std::size_t c) {
        partial[c] = kahan_chunk(v, c * kChunk, std::min(count, (c + 1) * kChunk));
      },
      exec);
  double sum = 0.0, comp = 0.0;
  for (double p : partial) {
    const double y = p - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double reduce_max(const double* v, std::size_t count, Exec exec) {
  if (count == 0) return -std::numeric_limits<double>::infinity();
  const std::size_t nchunks = (count + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks);
  for_each_index(
      nchunks,
      [&](std::size_t c) {
        double m = v[c * kChunk];
        const std::size_t hi = std::min(count, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk + 1; i < hi; ++i) m = std::max(m, v[i]);
        partial[c] = m;
      },
      exec);
  return *std::max_element(partial.begin(), partial.end());
}

double reduce_min(const double* v, std::size_t count, Exec exec) {
  if (count == 0) return std::numeric_limits<double>::infinity();
  const std::size_t nchunks = (count + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks);
  for_each_index(
      nchunks,
      [&](std::size_t c) {
        double m = v[c * kChunk];
        const std::size_t hi = std::min(count, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk + 1; i < hi; ++i) m = std::min(m, v[i]);
        partial[c] = m;
      },
      exec);
  return *std::min_element(partial.begin(), partial.end());
}

}  // namespace slope
