#ifndef STABLEMV_PARALLEL_HPP
#define STABLEMV_PARALLEL_HPP

#include <functional>
#include <thread>
#include <vector>

namespace stablemv {

/// Static-chunked parallel loop over [0, n). Each index is processed
/// exactly once and workers write disjoint output slots, so results do
/// not depend on the thread count.
inline void parallel_for(int n, int threads, const std::function<void(int, int)>& body) {
  if (threads <= 1 || n < 2) {
    body(0, n);
    return;
  }
  if (threads > n) threads = n;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    int lo = t * chunk;
    int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace stablemv

#endif
