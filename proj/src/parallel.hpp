#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace periopt::detail {

inline int worker_count() {
  if (const char* env = std::getenv("PERIOPT_WORKERS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Runs fn(begin, end) over disjoint path ranges. Workers write disjoint
// slices, so results are bit-identical for any worker count.
inline void parallel_paths(std::int64_t n,
                           const std::function<void(std::int64_t, std::int64_t)>& fn) {
  const int workers = worker_count();
  if (workers <= 1 || n < 4096) {
    fn(0, n);
    return;
  }
  const std::int64_t chunk = 4096;
  const std::int64_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::int64_t c = w; c < n_chunks; c += workers) {
        const std::int64_t b = c * chunk;
        fn(b, std::min(b + chunk, n));
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace periopt::detail
