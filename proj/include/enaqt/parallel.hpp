#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace enaqt {

// Runs body(i) for i in [0, count) across worker threads. Callers write
// results into preallocated slots indexed by i, so the outcome is identical
// regardless of scheduling. The first exception thrown by any worker is
// rethrown after all workers join.
inline void parallel_for(long count, const std::function<void(long)>& body,
                         int max_threads = 0) {
  if (count <= 0) return;
  long n_threads = max_threads > 0 ? max_threads
                                   : static_cast<long>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  if (n_threads > count) n_threads = count;
  if (n_threads == 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(n_threads));
  for (long t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace enaqt
