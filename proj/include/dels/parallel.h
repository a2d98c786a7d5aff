#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace dels {

// Runs fn(row) for every row in [0, rows) on up to `threads` workers. Rows
// are split into contiguous blocks; fn must only write row-local state, so
// results never depend on the schedule. The first exception is rethrown.
inline void ParallelForRows(int rows, int threads,
                            const std::function<void(int)>& fn) {
  const int workers = std::clamp(threads, 1, std::max(rows, 1));
  if (workers == 1) {
    for (int row = 0; row < rows; ++row) fn(row);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int begin = static_cast<int>(static_cast<long long>(rows) * w / workers);
    const int end =
        static_cast<int>(static_cast<long long>(rows) * (w + 1) / workers);
    pool.emplace_back([&, begin, end] {
      try {
        for (int row = begin; row < end; ++row) fn(row);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace dels
