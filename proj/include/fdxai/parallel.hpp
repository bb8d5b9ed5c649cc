#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fdxai {

/// Number of worker threads to use when the caller passes 0.
inline std::size_t default_thread_count() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count) on up to `threads` workers using a static
/// block partition. Output must only depend on i, never on the schedule. The
/// first exception thrown by any worker is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
  if (threads == 0) threads = default_thread_count();
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    const std::size_t begin = count * w / threads;
    const std::size_t end = count * (w + 1) / threads;
    workers.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (failure) std::rethrow_exception(failure);
}

/// Same contract as parallel_for, but each worker gets its own scratch state
/// built by make_state() once per worker: body(state, i).
template <typename MakeState, typename Body>
void parallel_for_with_state(std::size_t count, std::size_t threads, MakeState&& make_state,
                             Body&& body) {
  if (threads == 0) threads = default_thread_count();
  threads = std::max<std::size_t>(1, std::min(threads, count));
  parallel_for(threads, threads, [&](std::size_t w) {
    auto state = make_state();
    const std::size_t begin = count * w / threads;
    const std::size_t end = count * (w + 1) / threads;
    for (std::size_t i = begin; i < end; ++i) body(state, i);
  });
}

}  // namespace fdxai
