#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gmentropy {

/// Caps the number of worker threads used by chunked loops (0 = hardware).
void set_max_threads(unsigned n);
unsigned max_threads();

/// Fixed chunk size used by all Monte Carlo loops. Results depend on the
/// chunking only, never on the number of workers.
inline constexpr std::size_t kSampleChunk = 8192;

inline std::size_t chunk_count(std::size_t n, std::size_t chunk = kSampleChunk) {
  return (n + chunk - 1) / chunk;
}

/// Runs fn(i) for i in [0, n_tasks) on up to max_threads() workers.
/// The first exception thrown by any task is rethrown on the caller.
template <class Fn>
void parallel_for(std::size_t n_tasks, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(max_threads(), n_tasks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n_tasks);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gmentropy
