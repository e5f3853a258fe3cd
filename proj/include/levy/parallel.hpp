#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace levy {

/// Worker count from LEVY_THREADS, else hardware concurrency. Overridable.
inline int& thread_count_override() {
  static int value = 0;
  return value;
}

inline void set_thread_count(int n) { thread_count_override() = n; }

/// True on worker threads of an active parallel_blocks call.
inline bool& inside_parallel_region() {
  thread_local bool value = false;
  return value;
}

inline int thread_count() {
  if (thread_count_override() > 0) return thread_count_override();
  if (const char* env = std::getenv("LEVY_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(block_index, begin, end) over [0, n) in fixed-size blocks. Block
/// boundaries do not depend on the thread count, so callers that derive one
/// random stream per block get identical results for any thread count.
/// Nested calls run serially on the calling worker.
template <typename Fn>
void parallel_blocks(std::int64_t n, std::int64_t block, Fn&& fn) {
  if (n <= 0) return;
  const std::int64_t n_blocks = (n + block - 1) / block;
  const int workers = static_cast<int>(std::min<std::int64_t>(thread_count(), n_blocks));
  auto run = [&](std::int64_t b) { fn(b, b * block, std::min(n, (b + 1) * block)); };
  if (workers <= 1 || inside_parallel_region()) {
    for (std::int64_t b = 0; b < n_blocks; ++b) run(b);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      inside_parallel_region() = true;
      try {
        for (std::int64_t b = t; b < n_blocks; b += workers) run(b);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace levy
