#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace cureph::detail {

// Parallelism cap: CUREPH_THREADS when set, hardware concurrency otherwise.
inline int thread_cap() {
  if (const char* env = std::getenv("CUREPH_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(chunk_index, begin, end) over fixed-size chunks of [0, n) and
// returns the number of chunks. Chunk boundaries do not depend on the thread
// count, so per-chunk results can be reduced in chunk order for bit-identical
// output at any parallelism level.
template <typename Body>
int for_each_chunk(int n, int chunk_size, const Body& body) {
  const int n_chunks = n == 0 ? 0 : (n + chunk_size - 1) / chunk_size;
  const int n_threads = std::min(thread_cap(), std::max(1, n_chunks));
  if (n_threads <= 1 || n_chunks <= 1) {
    for (int c = 0; c < n_chunks; ++c) {
      body(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
    }
    return n_chunks;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      for (int c = t; c < n_chunks; c += n_threads) {
        body(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
      }
    });
  }
  for (auto& th : pool) th.join();
  return n_chunks;
}

}  // namespace cureph::detail
