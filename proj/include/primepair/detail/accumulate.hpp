#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <thread>
#include <vector>

namespace primepair {
namespace detail {

// Neumaier's variant of compensated summation.  Keeps a running
// correction term so that adding many small logarithms stays accurate
// independently of their magnitudes.
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }

  double total() const { return sum + comp; }
};

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

// Items [0, n) are cut into fixed-size blocks.  Workers grab blocks by
// atomic counter, so the assignment of blocks to threads is arbitrary,
// but every per-block result lands in a slot indexed by block number and
// the caller merges the slots in block order.  The block size never
// depends on the thread count, which makes floating-point reductions
// bit-identical for any number of threads.
constexpr std::size_t kAccumBlock = 4096;

template <class BlockFn>
void run_blocks(std::size_t n, unsigned threads, BlockFn&& fn) {
  if (n == 0) return;
  std::size_t nblocks = (n + kAccumBlock - 1) / kAccumBlock;
  threads = resolve_threads(threads);
  if (threads <= 1 || nblocks == 1) {
    for (std::size_t b = 0; b < nblocks; ++b)
      fn(b, b * kAccumBlock, std::min(n, (b + 1) * kAccumBlock));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      fn(b, b * kAccumBlock, std::min(n, (b + 1) * kAccumBlock));
    }
  };
  std::vector<std::thread> pool;
  unsigned use = static_cast<unsigned>(std::min<std::size_t>(threads, nblocks));
  pool.reserve(use);
  for (unsigned t = 0; t < use; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

// Deterministic parallel sum of f(i) for i in [0, n): per-block Neumaier
// sums merged in block index order.
template <class Fn>
double block_sum(std::size_t n, unsigned threads, Fn&& f) {
  if (n == 0) return 0.0;
  std::size_t nblocks = (n + kAccumBlock - 1) / kAccumBlock;
  std::vector<double> partial(nblocks, 0.0);
  run_blocks(n, threads, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    NeumaierSum acc;
    for (std::size_t i = lo; i < hi; ++i) acc.add(f(i));
    partial[b] = acc.total();
  });
  NeumaierSum out;
  for (double v : partial) out.add(v);
  return out.total();
}

}  // namespace detail
}  // namespace primepair
