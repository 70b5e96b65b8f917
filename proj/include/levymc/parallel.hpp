#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace levymc {

/// Worker count: LEVYMC_THREADS if set, else hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("LEVYMC_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Parallel map over [0, n). Work items must write only to per-index slots;
/// results are then independent of the schedule.
template <class Fn>
void parallel_for(long n, Fn&& fn) {
  const int workers = thread_count();
  if (workers <= 1 || n <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&] {
    try {
      for (;;) {
        long i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) break;
        fn(i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 0; t < workers - 1; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace levymc
