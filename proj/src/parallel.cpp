#include "ssaa/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ssaa {

namespace {
std::atomic<std::size_t> forced{0};
}

bool& detail::in_parallel_region() {
  thread_local bool inside = false;
  return inside;
}

std::size_t thread_count() {
  if (const std::size_t n = forced.load()) return n;
  if (const char* env = std::getenv("POOLED_SAA_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void set_thread_count(std::size_t n) { forced.store(n); }

}  // namespace ssaa
