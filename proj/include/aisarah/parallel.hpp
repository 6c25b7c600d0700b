#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace aisarah {

inline std::size_t default_thread_count() noexcept {
  const auto hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Calls body(i) for i in [0, count) on up to `threads` workers. Jobs are
/// handed out in index order; results belong in slots indexed by i so the
/// outcome does not depend on scheduling. The first exception is rethrown.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace aisarah
