#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace elfuse {

/// Thread count: explicit value if non-zero, else $ELFUSE_THREADS, else the
/// hardware concurrency (at least 1).
unsigned resolve_threads(unsigned requested);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Work is handed
/// out by an atomic counter; callers write results into slot i so that any
/// later reduction can fold them in index order.
///
/// If any call throws, the exception from the lowest failing index is
/// rethrown after all workers stop, together with that index.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body,
                  std::size_t* failed_index = nullptr) {
  std::atomic<std::size_t> next{0};
  // Indices at or above the lowest failure seen so far are skipped; lower
  // ones still run, so the reported failure does not depend on scheduling.
  std::atomic<std::size_t> limit{n};
  std::mutex error_mutex;
  std::optional<std::size_t> first_failure;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= limit.load(std::memory_order_relaxed)) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_failure || i < *first_failure) {
          first_failure = i;
          first_error = std::current_exception();
        }
        std::size_t cur = limit.load(std::memory_order_relaxed);
        while (i < cur && !limit.compare_exchange_weak(cur, i, std::memory_order_relaxed)) {
        }
      }
    }
  };

  const unsigned count = threads == 0 ? 1 : threads;
  if (count == 1 || n < 2) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  if (first_error) {
    if (failed_index != nullptr) *failed_index = *first_failure;
    std::rethrow_exception(first_error);
  }
}

}  // namespace elfuse
