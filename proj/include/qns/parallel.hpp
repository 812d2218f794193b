#pragma once

#include "qns/core.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qns {

/// Thread count used by parallel_for; 0 means hardware concurrency.
inline unsigned& worker_threads() {
  static unsigned n = 0;
  return n;
}

/// Runs f(i) for i in [0, n). Each index must write only its own output slot,
/// so the result does not depend on the schedule.
template <class F>
void parallel_for(Index n, F&& f) {
  unsigned t = worker_threads() ? worker_threads() : std::max(1u, std::thread::hardware_concurrency());
  t = static_cast<unsigned>(std::min<Index>(t, n));
  if (t <= 1) {
    for (Index i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < t; ++k) {
    pool.emplace_back([&] {
      for (Index i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

} // namespace qns
