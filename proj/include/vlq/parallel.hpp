#pragma once

#include <cstddef>
#include <functional>

namespace vlq {

/// Worker count from VLQ_WORKERS, falling back to the hardware concurrency.
int default_workers();

/// Runs body(i) for every i in [0, n) on up to `workers` threads. Indices are
/// claimed dynamically; callers that need deterministic results must write
/// into per-index slots and reduce afterwards. The first exception thrown by
/// any body is rethrown on the calling thread once all workers have stopped.
void parallel_for(std::size_t n, int workers, std::function<void(std::size_t)> const& body);

}  // namespace vlq
