#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cosine::detail {

// Runs fn(worker, begin, end) over [0, count) in chunks pulled from a shared
// counter. The first exception thrown by any worker is rethrown after join.
template <class Fn>
void parallel_chunks(std::size_t count, std::size_t workers, std::size_t chunk, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count == 0 ? 1 : count));
  chunk = std::max<std::size_t>(1, chunk);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&](std::size_t worker) {
    try {
      for (;;) {
        const std::size_t begin = next.fetch_add(chunk);
        if (begin >= count) break;
        fn(worker, begin, std::min(count, begin + chunk));
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(count);
    }
  };
  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(body, w);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace cosine::detail
