#pragma once
// Deterministic chunked parallelism: fixed contiguous partitions, results
// combined in chunk order by the caller. Output never depends on thread count.

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace qgraph {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Splits [0, total) into at most `threads` contiguous chunks and runs
// fn(begin, end, chunk_index) on each. Chunk 0 runs on the calling thread.
inline void parallel_chunks(std::size_t total, int threads,
                            const std::function<void(std::size_t, std::size_t, int)>& fn) {
  int n = resolve_threads(threads);
  if (total == 0) return;
  if (static_cast<std::size_t>(n) > total) n = static_cast<int>(total);
  if (n <= 1) {
    fn(0, total, 0);
    return;
  }
  std::size_t base = total / n;
  std::size_t rem = total % n;
  std::vector<std::thread> pool;
  pool.reserve(n - 1);
  std::size_t begin = 0;
  for (int c = 0; c < n; ++c) {
    std::size_t len = base + (static_cast<std::size_t>(c) < rem ? 1 : 0);
    std::size_t end = begin + len;
    if (c == 0) {
      begin = end;
      continue;
    }
    pool.emplace_back([&fn, begin, end, c] { fn(begin, end, c); });
    begin = end;
  }
  fn(0, base + (rem > 0 ? 1 : 0), 0);
  for (auto& t : pool) t.join();
}

// Fixed-tree pairwise sum: result depends only on the values and their order,
// not on how they were produced or how many threads filled them in.
inline double pairwise_sum(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  std::size_t n = end - begin;
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += v[i];
    return s;
  }
  std::size_t mid = begin + n / 2;
  return pairwise_sum(v, begin, mid) + pairwise_sum(v, mid, end);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v, 0, v.size()); }

}  // namespace qgraph
