#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace sparsevar {

/// Number of workers.  SPARSEVAR_THREADS overrides an explicit request;
/// otherwise the request wins, falling back to the hardware concurrency.
inline int resolve_thread_count(int requested = 0) {
  if (const char* env = std::getenv("SPARSEVAR_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Run fn(i) for i in [0, n) on a small worker pool.  Tasks pull the next
/// index from a shared counter; results must be written to independent
/// slots, so the outcome does not depend on scheduling.
template <class Fn>
inline void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::min(std::max(threads, 1), n);
  if (n <= 0) return;
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace sparsevar
