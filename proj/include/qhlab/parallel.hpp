// Block-partitioned parallel loops capped by QHLAB_THREADS.
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace qhlab {

/// Worker count: QHLAB_THREADS if set and positive, else the hardware count.
inline unsigned worker_count() {
  if (const char* env = std::getenv("QHLAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs f(begin, end, block) over contiguous blocks of [0, n). Block b always
/// covers the same range for a given n, so per-block results reduce in a
/// fixed order regardless of the worker count.
template <class F>
void parallel_blocks(std::size_t n, std::size_t blocks, F&& f) {
  if (n == 0 || blocks == 0) return;
  blocks = std::min(blocks, n);
  auto range = [&](std::size_t b) { return std::pair{n * b / blocks, n * (b + 1) / blocks}; };
  const unsigned workers = std::min<std::size_t>(worker_count(), blocks);
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) f(range(b).first, range(b).second, b);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned wkr = 0; wkr < workers; ++wkr)
    pool.emplace_back([&, wkr] {
      for (std::size_t b = wkr; b < blocks; b += workers) f(range(b).first, range(b).second, b);
    });
  for (auto& th : pool) th.join();
}

}  // namespace qhlab
