#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace axiomgrad {

// Number of worker threads an operation may use. Results never depend on it:
// work items write to indexed slots and reductions happen afterwards in a
// fixed order.
struct Workers {
  std::size_t count = 1;
};

// Calls fn(i) for i in [0, n). Items are claimed dynamically; fn must only
// write state owned by item i. The first exception thrown is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, Workers workers, Fn&& fn) {
  const std::size_t threads = std::min(workers.count, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads - 1);
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(body);
    body();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace axiomgrad
