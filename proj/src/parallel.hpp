#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace mixlogit {

inline constexpr int kChunkSize = 64;

inline int chunk_count(int n) { return (n + kChunkSize - 1) / kChunkSize; }

// Runs fn(chunk_index, begin, end) over fixed-size chunks of [0, n).
// Chunk boundaries never depend on the thread count, so any per-chunk
// accumulation combined in chunk order is reproducible bit for bit.
template <typename Fn>
void for_each_chunk(int n, int n_threads, Fn&& fn) {
  const int n_chunks = chunk_count(n);
  auto run = [&](int c) {
    const int begin = c * kChunkSize;
    const int end = std::min(n, begin + kChunkSize);
    fn(c, begin, end);
  };
  if (n_threads <= 1 || n_chunks <= 1) {
    for (int c = 0; c < n_chunks; ++c) run(c);
    return;
  }
  std::atomic<int> next{0};
  const int workers = std::min(n_threads, n_chunks);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) run(c);
    });
  for (auto& th : pool) th.join();
}

}  // namespace mixlogit
