// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace compact::detail {

/// Worker count: explicit request, else COMPACT_THREADS, else hardware.
inline std::size_t thread_budget(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("COMPACT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n). Each index must write only its own output slot;
/// the first exception is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace compact::detail
