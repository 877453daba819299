// Deterministic fork/join helper.  Work is split into contiguous chunks and
// per-chunk results are reduced in chunk order, so the outcome does not
// depend on the worker count.

#ifndef DRILL_PARALLEL_HPP_
#define DRILL_PARALLEL_HPP_

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace drill {

inline unsigned& worker_count() {
  static unsigned n = std::min(8u, std::max(1u, std::thread::hardware_concurrency()));
  return n;
}

// Applies body(begin, end, slot) on disjoint ranges covering [0, n).
// slot identifies the chunk; callers reduce their slots in index order.
inline std::size_t parallel_chunks(std::size_t n,
                                   const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  unsigned workers = worker_count();
  if (n == 0) return 0;
  std::size_t chunks = std::min<std::size_t>(n, std::max<std::size_t>(1, workers * 4));
  std::size_t step = (n + chunks - 1) / chunks;
  chunks = (n + step - 1) / step;
  if (workers <= 1 || chunks <= 1 || n < 64) {
    for (std::size_t c = 0; c < chunks; ++c)
      body(c * step, std::min(n, (c + 1) * step), c);
    return chunks;
  }
  std::vector<std::thread> pool;
  std::size_t per_thread = (chunks + workers - 1) / workers;
  for (unsigned t = 0; t < workers; ++t) {
    std::size_t c0 = t * per_thread, c1 = std::min<std::size_t>(chunks, c0 + per_thread);
    if (c0 >= c1) break;
    pool.emplace_back([&, c0, c1] {
      for (std::size_t c = c0; c < c1; ++c)
        body(c * step, std::min(n, (c + 1) * step), c);
    });
  }
  for (auto& th : pool) th.join();
  return chunks;
}

}  // namespace drill

#endif  // DRILL_PARALLEL_HPP_
