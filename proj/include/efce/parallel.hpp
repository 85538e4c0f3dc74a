#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace efce {

// Runs fn(i) for i in [0, n) on up to `threads` workers over contiguous
// chunks.  Falls back to the calling thread for threads <= 1 or tiny n.
// Callers own determinism: write to disjoint slots, reduce sequentially.
inline void parallel_for(int threads, int n, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int width = std::min(threads, n);
  if (width <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(width);
  int chunk = (n + width - 1) / width;
  for (int w = 0; w < width; ++w) {
    int lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([=, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace efce
