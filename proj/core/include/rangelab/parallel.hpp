#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace rangelab {

/// Worker count: RANGELAB_THREADS if set, else hardware concurrency.
inline int default_threads() {
  if (const char* env = std::getenv("RANGELAB_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for every i in [0, count). Indices are split into contiguous
/// blocks, one per worker; callers write results to slot i, so the outcome does
/// not depend on the worker count. The first exception is rethrown.
template <class Fn>
void parallel_for(std::int64_t count, Fn&& fn, int threads = 0) {
  if (count <= 0) return;
  if (threads <= 0) threads = default_threads();
  threads = static_cast<int>(std::min<std::int64_t>(threads, count));
  if (threads == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    const std::int64_t lo = count * t / threads;
    const std::int64_t hi = count * (t + 1) / threads;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Fixed-shape pairwise sum, identical for serial and parallel callers.
inline double tree_sum(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return tree_sum(xs.first(half)) + tree_sum(xs.subspan(half));
}

}  // namespace rangelab
