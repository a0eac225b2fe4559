#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace firmlab {

namespace detail {

inline std::atomic<int>& worker_cap_storage() {
  static std::atomic<int> cap{0};
  return cap;
}

}  // namespace detail

/// Caps the worker count used by parallel scans; 0 restores the hardware
/// default. Scan results never depend on this value.
inline void set_max_threads(int n) {
  detail::worker_cap_storage().store(n < 0 ? 0 : n);
}

inline int max_threads() {
  const int cap = detail::worker_cap_storage().load();
  if (cap > 0) return cap;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

// Splits [0, n) into fixed-size chunks, reduces each chunk sequentially and
// folds the partial results in chunk order. Chunk boundaries depend only on
// n, so the result is identical for every worker count.
template <class T, class ChunkFn, class MergeFn>
T chunked_reduce(int n, T init, ChunkFn chunk_fn, MergeFn merge) {
  if (n <= 0) return init;
  constexpr int kChunkSize = 1024;
  const int num_chunks = (n + kChunkSize - 1) / kChunkSize;
  const int workers = std::min(max_threads(), num_chunks);

  std::vector<T> partial(static_cast<std::size_t>(num_chunks), init);
  if (workers <= 1) {
    for (int c = 0; c < num_chunks; ++c) {
      partial[static_cast<std::size_t>(c)] =
          chunk_fn(c * kChunkSize, std::min(n, (c + 1) * kChunkSize));
    }
  } else {
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::atomic_flag error_latch = ATOMIC_FLAG_INIT;
    auto work = [&]() {
      for (;;) {
        const int c = next.fetch_add(1);
        if (c >= num_chunks || failed.load()) return;
        try {
          partial[static_cast<std::size_t>(c)] =
              chunk_fn(c * kChunkSize, std::min(n, (c + 1) * kChunkSize));
        } catch (...) {
          if (!error_latch.test_and_set()) error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failed.load() && error) std::rethrow_exception(error);
  }

  T acc = std::move(init);
  for (auto& p : partial) acc = merge(std::move(acc), std::move(p));
  return acc;
}

}  // namespace detail

}  // namespace firmlab
