#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace priorgate {

/// --threads, falling back to PRIORGATE_THREADS, then hardware concurrency.
int resolve_threads(int requested);

/// Runs fn(shard, begin, end) over `threads` contiguous shards of [0, n).
/// Shard boundaries depend only on (n, threads); callers that need
/// thread-count-independent output must merge commutatively or sort after.
template <typename Fn>
void parallel_shards(std::size_t n, int threads, Fn&& fn) {
  if (threads < 1) threads = 1;
  if (static_cast<std::size_t>(threads) > n) threads = n == 0 ? 1 : static_cast<int>(n);
  if (threads == 1) {
    fn(0, std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = n / threads;
  const std::size_t rem = n % threads;
  std::size_t begin = 0;
  for (int s = 0; s < threads; ++s) {
    std::size_t end = begin + chunk + (static_cast<std::size_t>(s) < rem ? 1 : 0);
    pool.emplace_back([&fn, s, begin, end] { fn(s, begin, end); });
    begin = end;
  }
  for (auto& t : pool) t.join();
}

}  // namespace priorgate
