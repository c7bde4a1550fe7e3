#pragma once

// Deterministic fork-join helper. Work items write to preallocated,
// index-addressed slots and any cross-item reduction happens serially
// afterwards, so results are byte-identical no matter how many workers the
// FCPCA_THREADS environment variable allows.

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace fcomb {

inline int thread_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("FCPCA_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) n = std::min(n, cap);
      if (cap >= 1 && cap <= 256) n = cap;  // explicit setting wins
    } catch (...) {
      // unparsable value: keep the hardware default
    }
  }
  return n;
}

// Runs fn(i) for i in [0, n). Blocks until all items finish; the first
// exception thrown by any item is rethrown in the caller.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  const int workers = std::min(thread_count(), std::max(n, 1));
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (int i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace fcomb
