#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ssaa {

/// Worker count: POOLED_SAA_THREADS if set, else the hardware concurrency.
std::size_t thread_count();

/// Forces a worker count (0 restores the default). Used to compare schedules.
void set_thread_count(std::size_t n);

namespace detail {
bool& in_parallel_region();
}

/// Calls f(i) for i in [0, n). Work is handed out dynamically; callers write
/// results into per-index slots so the outcome does not depend on the schedule.
/// Nested calls run serially on the calling thread.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers = std::min(thread_count(), n);
  if (workers <= 1 || detail::in_parallel_region()) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto body = [&] {
    detail::in_parallel_region() = true;
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    detail::in_parallel_region() = false;
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ssaa
