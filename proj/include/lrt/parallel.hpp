#pragma once

#include <cstddef>
#include <functional>

namespace lrt {

/// Thread count used by parallel loops: LRT_THREADS when set, otherwise the
/// hardware concurrency.
unsigned default_thread_count();

/// Runs fn(i) for i in [0, n) across up to `threads` workers. Work items must
/// write to disjoint outputs; the partition of indices is deterministic, so
/// results never depend on scheduling. The first exception thrown by a worker
/// is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

}  // namespace lrt
