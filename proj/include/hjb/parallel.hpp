#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hjb {

/// Execution policy plumbed through the per-point parallel loops.
/// threads == 1 is the single-threaded reproducibility reference. All loops
/// in this library are pure per-point maps with serial fixed-order reductions,
/// so results are identical for any thread count; the flag only trades speed.
struct ExecPolicy {
  int threads = 1;

  static ExecPolicy single() { return ExecPolicy{1}; }
  static ExecPolicy hardware() {
    unsigned hc = std::thread::hardware_concurrency();
    return ExecPolicy{static_cast<int>(hc == 0 ? 1 : hc)};
  }
};

/// Runs fn(i, worker) for i in [0, count) over static contiguous chunks;
/// `worker` indexes the executing thread so callers can bind per-thread
/// scratch. fn must only write to per-index or per-worker state.
template <class Fn>
void parallel_for_workers(std::size_t count, const ExecPolicy& exec, Fn&& fn) {
  int threads = std::max(1, exec.threads);
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i, std::size_t{0});
    return;
  }
  std::size_t workers = std::min<std::size_t>(threads, count);
  std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi, w] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i, w);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

template <class Fn>
void parallel_for(std::size_t count, const ExecPolicy& exec, Fn&& fn) {
  parallel_for_workers(count, exec, [&fn](std::size_t i, std::size_t) { fn(i); });
}

}  // namespace hjb
