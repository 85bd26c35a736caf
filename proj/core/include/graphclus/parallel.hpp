#pragma once

#include <cstddef>
#include <functional>

namespace graphclus {

/// Worker count: GRAPHCLUS_THREADS if set to a positive integer, otherwise
/// std::thread::hardware_concurrency() (at least 1).
std::size_t worker_threads();

/// Runs body(i) for i in [0, n) across worker_threads() threads using static
/// contiguous chunks. The first exception thrown by any body is rethrown.
/// Callers that need deterministic results must write to per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace graphclus
