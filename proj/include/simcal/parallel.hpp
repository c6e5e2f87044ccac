#ifndef SIMCAL_PARALLEL_HPP
#define SIMCAL_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace simcal {

/// Runs task(i) for i in [0, count). Implementations may run tasks in any
/// order and concurrently; callers must not depend on either.
using BatchExecutor = std::function<void(std::size_t count, const std::function<void(std::size_t)>& task)>;

inline BatchExecutor serial_executor() {
  return [](std::size_t count, const std::function<void(std::size_t)>& task) {
    for (std::size_t i = 0; i < count; ++i) task(i);
  };
}

/// Fans a batch out over `workers` threads pulling indices from a shared
/// counter. The first exception thrown by a task is rethrown after the join.
inline BatchExecutor thread_executor(unsigned workers) {
  if (workers <= 1) return serial_executor();
  return [workers](std::size_t count, const std::function<void(std::size_t)>& task) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
      std::vector<std::jthread> pool;
      const std::size_t n = std::min<std::size_t>(workers, count);
      pool.reserve(n);
      for (std::size_t w = 0; w < n; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < count; i = next++) {
            try {
              task(i);
            } catch (...) {
              std::lock_guard lock(error_mutex);
              if (!error) error = std::current_exception();
            }
          }
        });
      }
    }
    if (error) std::rethrow_exception(error);
  };
}

}  // namespace simcal

#endif  // SIMCAL_PARALLEL_HPP
