#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace surfmc {

// Runs fn(i) for i in [0, count) across `workers` threads.  Indices are handed
// out through an atomic counter; each index must write only its own outputs,
// so the (nondeterministic) schedule cannot influence results.  The first
// exception thrown by any worker is rethrown on the calling thread.
inline void parallel_for(long count, int workers, const std::function<void(long)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto body = [&] {
    for (;;) {
      const long i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  const int spawn = static_cast<int>(std::min<long>(workers, count));
  threads.reserve(spawn);
  for (int w = 0; w < spawn; ++w) threads.emplace_back(body);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace surfmc
