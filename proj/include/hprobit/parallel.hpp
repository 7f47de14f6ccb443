#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hprobit {

// Runs body(i) for i in [0, n) on up to `threads` workers, each over one
// contiguous block. Results are deterministic provided body(i) only writes to
// slots owned by i and draws from streams keyed by i.
template <typename Body>
void parallel_for(std::size_t n, std::size_t threads, Body&& body, std::size_t min_block = 256) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n / std::max<std::size_t>(min_block, 1), 1));
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  const std::size_t block = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * block;
    const std::size_t end = std::min(n, begin + block);
    if (begin >= end) break;
    workers.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace hprobit
