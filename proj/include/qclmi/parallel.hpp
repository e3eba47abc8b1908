#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace qclmi {

// Compensated (Kahan) accumulator for reduction sums that must not depend on
// optimization or iteration batching beyond the order add() is called in.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

struct BlockRange {
  long begin = 0;
  long end = 0;
};

// Fixed partition of [0,n) into blocks of `block` items (last one short). The
// partition depends only on (n, block), never on the thread count, so per-block
// results can be combined in index order for bitwise-reproducible reductions.
inline std::vector<BlockRange> make_blocks(long n, long block) {
  std::vector<BlockRange> out;
  if (n <= 0) return out;
  if (block < 1) block = 1;
  out.reserve(static_cast<size_t>((n + block - 1) / block));
  for (long b = 0; b < n; b += block) out.push_back({b, std::min(b + block, n)});
  return out;
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(block_index, range) for every block; blocks are claimed dynamically
// but each writes only to its own slot, so results are thread-count invariant.
inline void parallel_blocks(const std::vector<BlockRange>& blocks, int threads,
                            const std::function<void(size_t, BlockRange)>& fn) {
  if (blocks.empty()) return;
  if (threads <= 1 || blocks.size() == 1) {
    for (size_t i = 0; i < blocks.size(); ++i) fn(i, blocks[i]);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= blocks.size()) return;
      fn(i, blocks[i]);
    }
  };
  const size_t n_workers =
      std::min(static_cast<size_t>(threads), blocks.size());
  std::vector<std::thread> pool;
  pool.reserve(n_workers - 1);
  for (size_t i = 1; i < n_workers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace qclmi
