#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace hlab {

/// Execution settings threaded through the expensive operations.
struct Exec {
  int threads = 1;
};

/// Thread count from an explicit request (> 0), else HLAB_THREADS, else 1.
int resolve_threads(int requested);

/// Calls f(i) for i in [0, n) over contiguous blocks, one per worker. f must
/// only write to per-index state, so results do not depend on the thread
/// count. The first exception thrown by a worker is rethrown.
template <class F>
void parallel_for(std::size_t n, const Exec& exec, F&& f) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(exec.threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
      try {
        for (std::size_t i = lo; i < hi; ++i) f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace hlab
