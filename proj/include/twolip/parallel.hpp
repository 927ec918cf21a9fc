#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace twolip {

/// Runs job(i) for i in [0, count) on `threads` workers pulling indices from
/// a shared counter. Jobs must be independent; callers that need ordered
/// output should write into slot i and sort afterwards. The first exception
/// is rethrown after all workers join. threads <= 1 runs inline.
inline void parallel_for_index(int count, int threads,
                               const std::function<void(int)>& job) {
  if (count <= 0) return;
  if (threads <= 1 || count == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int worker_count = std::min(threads, count);
  pool.reserve(worker_count);
  for (int t = 0; t < worker_count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace twolip
