#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace scene4d {

// Runs fn(i) for i in [0, n) split into contiguous chunks, one per worker.
// Output written by distinct indices is race-free; results do not depend on
// the thread count as long as fn(i) touches only index-i state.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 2 * threads) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace scene4d
