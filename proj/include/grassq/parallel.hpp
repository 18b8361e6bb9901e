// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace grassq {

/// Process-wide worker count for `parallel_for`. 0 means hardware concurrency.
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs `fn(i)` for i in [0, count) on up to max_threads() workers. Tasks
/// must write only to slot i of caller-owned storage; the caller merges in
/// index order, so results do not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(max_threads(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Splits [0, total) into fixed-size blocks (independent of thread count).
struct BlockRange {
  std::size_t begin;
  std::size_t end;
};

inline std::vector<BlockRange> make_blocks(std::size_t total, std::size_t block) {
  std::vector<BlockRange> out;
  for (std::size_t b = 0; b < total; b += block) out.push_back({b, std::min(total, b + block)});
  return out;
}

}  // namespace grassq
