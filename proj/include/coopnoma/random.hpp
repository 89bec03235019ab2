#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace coopnoma {

using Rng = std::mt19937_64;

/// Trials and samples are processed in fixed-size blocks; block b always
/// draws from stream (seed, b), so results do not depend on how blocks are
/// distributed over workers.
inline constexpr std::int64_t kBlockSize = 8192;

inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x6e6f6d61u};
  return Rng(seq);
}

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

inline std::int64_t block_count(std::int64_t n) { return (n + kBlockSize - 1) / kBlockSize; }

/// Runs fn(block) for every block in [0, n_blocks) on up to `workers`
/// threads. fn must only write to per-block storage.
template <class Fn>
void parallel_blocks(std::int64_t n_blocks, int workers, Fn&& fn) {
  workers = static_cast<int>(std::min<std::int64_t>(resolve_workers(workers), n_blocks));
  if (workers <= 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::int64_t b = next++; b < n_blocks; b = next++) fn(b);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n_blocks;
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace coopnoma
